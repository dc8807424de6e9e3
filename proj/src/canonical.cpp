#include "tcr/canonical.hpp"

namespace tcr {

canonical_writer &canonical_writer::byte(std::uint8_t b) {
    buf_.push_back(b);
    return *this;
}

canonical_writer &canonical_writer::u64(std::uint64_t v) {
    for (int shift = 56; shift >= 0; shift -= 8) {
        buf_.push_back(static_cast<std::uint8_t>(v >> shift));
    }
    return *this;
}

canonical_writer &canonical_writer::put(const digest &d) {
    buf_.insert(buf_.end(), d.data.begin(), d.data.end());
    return *this;
}

void canonical_reader::need(std::size_t n) const {
    if (in_.size() - pos_ < n) {
        throw decode_error{"truncated canonical message"};
    }
}

std::uint8_t canonical_reader::byte() {
    need(1);
    return in_[pos_++];
}

std::uint64_t canonical_reader::u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) {
        v = (v << 8) | in_[pos_++];
    }
    return v;
}

digest canonical_reader::get_digest() {
    need(digest::size);
    auto d = digest::from_bytes(in_.subspan(pos_, digest::size));
    pos_ += digest::size;
    return d;
}

void canonical_reader::expect_done() const {
    if (!done()) {
        throw decode_error{"trailing bytes after canonical message"};
    }
}

} // namespace tcr
