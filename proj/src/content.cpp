#include "tcr/content.hpp"

#include "tcr/canonical.hpp"

#include <algorithm>

namespace tcr {

blob_hashes hash_blobs(const blob_set &blobs) {
    return {hash(blobs.image), hash(blobs.build), hash(blobs.compose)};
}

digest compute_lambda(const blob_hashes &h, const digest &mu_cs) {
    canonical_writer w;
    w.put(h.image).put(h.build).put(h.compose).put(mu_cs);
    return hash(w.view());
}

digest compute_lambda(const blob_set &blobs, const digest &mu_cs) {
    return compute_lambda(hash_blobs(blobs), mu_cs);
}

bytes apply_keystream(const digest &sigma, byte_view data) {
    bytes out(data.begin(), data.end());
    for (std::size_t off = 0, block = 0; off < out.size(); off += digest::size, ++block) {
        canonical_writer w;
        w.u64(block);
        const digest pad = hmac(w.view(), sigma);
        const std::size_t n = std::min(digest::size, out.size() - off);
        for (std::size_t k = 0; k < n; ++k) {
            out[off + k] ^= pad.data[k];
        }
    }
    return out;
}

} // namespace tcr
