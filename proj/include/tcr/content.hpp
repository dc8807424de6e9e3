#pragma once

#include "tcr/digest.hpp"

namespace tcr {

/// The three files that make up one container version.
struct blob_set {
    bytes image;
    bytes build;
    bytes compose;

    friend bool operator==(const blob_set &, const blob_set &) = default;
};

struct blob_hashes {
    digest image, build, compose;
};

blob_hashes hash_blobs(const blob_set &blobs);

/// lambda = h(H_CI || H_BC || H_CF || mu_cs). Unencrypted versions use mu_cs = 0.
digest compute_lambda(const blob_hashes &h, const digest &mu_cs);
digest compute_lambda(const blob_set &blobs, const digest &mu_cs);

/// Keystream cipher: block j is XORed with hmac(u64 j, sigma). Its own inverse.
bytes apply_keystream(const digest &sigma, byte_view data);

} // namespace tcr
