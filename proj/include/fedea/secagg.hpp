#ifndef FEDEA_SECAGG_HPP
#define FEDEA_SECAGG_HPP

#include <gmp.h>

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "fedea/core.hpp"

namespace fedea::secagg {

/// Value-semantic arbitrary-precision integer (thin RAII wrapper over GMP).
class Bigint {
public:
    Bigint() { mpz_init(v_); }
    explicit Bigint(unsigned long x) { mpz_init_set_ui(v_, x); }
    Bigint(const Bigint& o) { mpz_init_set(v_, o.v_); }
    Bigint(Bigint&& o) noexcept {
        mpz_init(v_);
        mpz_swap(v_, o.v_);
    }
    Bigint& operator=(const Bigint& o) {
        if (this != &o) mpz_set(v_, o.v_);
        return *this;
    }
    Bigint& operator=(Bigint&& o) noexcept {
        mpz_swap(v_, o.v_);
        return *this;
    }
    ~Bigint() { mpz_clear(v_); }

    static Bigint from_hex(const std::string& hex);
    static Bigint from_dec(const std::string& dec);
    std::string to_hex() const;
    std::string to_dec() const;

    std::size_t bit_length() const { return mpz_sizeinbase(v_, 2); }
    bool is_probable_prime() const { return mpz_probab_prime_p(v_, 32) != 0; }

    friend bool operator==(const Bigint& a, const Bigint& b) { return mpz_cmp(a.v_, b.v_) == 0; }
    friend bool operator<(const Bigint& a, const Bigint& b) { return mpz_cmp(a.v_, b.v_) < 0; }

    mpz_t& raw() { return v_; }
    const mpz_t& raw() const { return v_; }

private:
    mpz_t v_;
};

/// base^exp mod modulus.
Bigint mod_exp(const Bigint& base, const Bigint& exp, const Bigint& modulus);

enum class GroupPreset { Test64, Rfc2048, Rfc3072 };

GroupPreset parse_group_preset(const std::string& name);  // test-64bit / rfc-2048 / rfc-3072
std::string to_string(GroupPreset preset);

/// Safe-prime group: p = 2q + 1 with p, q prime and g generating the order-q
/// subgroup.
struct GroupParams {
    Bigint p;
    Bigint q;
    Bigint g;
};

GroupParams gen_group_params(GroupPreset preset);
/// Checks the GroupParams invariants (primality, p = 2q+1, g^q = 1, g != 1).
bool validate_group(const GroupParams& params);

struct KeyPair {
    Bigint secret_exponent;  // in [1, q-1]
    Bigint public_key;       // g^secret mod p
};

/// Deterministic keypair from a seed; the secret is (near-)uniform in [1, q-1].
KeyPair keygen(const GroupParams& params, std::uint64_t seed);
/// Keypair with a caller-chosen secret (test vectors, demo groups).
KeyPair keypair_from_secret(const GroupParams& params, const Bigint& secret);

using SharedKey = std::array<std::uint8_t, 32>;

/// key = SHA-256(fixed-width encoding of peer_public^my_secret mod p).
/// Rejects degenerate peer elements (<= 1 or >= p-1) and, when g generates
/// the prime-order subgroup, elements outside that subgroup.
SharedKey derive_shared_key(const GroupParams& params, const Bigint& my_secret,
                            const Bigint& peer_public);

std::string to_hex(const SharedKey& key);

/// One client's view of the pairwise key agreement.
struct Keyring {
    int owner = -1;
    std::map<int, SharedKey> shared;  // peer id -> key_{i,j} (symmetric)
};

/// Per-invocation public randomness for the mask PRF.
struct Salt {
    std::uint32_t round = 0;
    std::uint32_t iteration = 0;
    std::array<std::uint8_t, 16> nonce{};

    bool operator==(const Salt&) const = default;
    auto operator<=>(const Salt&) const = default;
};

Salt make_salt(std::uint32_t round, std::uint32_t iteration, Rng& rng);

/// Deterministic expansion of SHA-256(key || salt || counter) into `count`
/// uniform reals in [0, scale). scale = 0 yields the zero vector. Both
/// endpoints of a pair produce the identical stream.
std::vector<double> mask_stream(const SharedKey& key, const Salt& salt, std::size_t count,
                                double scale);

/// Per-objective mask scales: column m of the mask is drawn from
/// [0, scales[m]). A single scalar applies to every column.
struct MaskScale {
    std::vector<double> per_column;

    static MaskScale uniform(double scale, std::size_t cols) {
        return {std::vector<double>(cols, scale)};
    }
};

/// Eq.-(3)-style pairwise mask: +stream for peers with higher id, -stream for
/// lower, streams keyed by the unordered pair so the masks of all K clients
/// sum to zero. expected_peers = K-1 guards against an incomplete keyring.
Matrix compute_mask(int my_id, const Keyring& keyring, const Salt& salt, std::size_t rows,
                    std::size_t cols, const MaskScale& scale, std::size_t expected_peers);

/// A prediction batch plus its additive mask, as transmitted.
struct MaskedObjectiveMatrix {
    Matrix values;
    Salt salt;
    int sender = -1;
};

/// Exact sum of all K clients' predictions: masked matrices from the K-1
/// peers plus the aggregator's own prediction and mask, accumulated in
/// client-id order (so the zero-scale case reproduces a plaintext sum
/// bit-for-bit). Throws on shape or salt mismatch.
Matrix unmask_aggregate(const std::vector<MaskedObjectiveMatrix>& masked_from_others,
                        const Matrix& own_prediction, const Matrix& own_mask, int own_id,
                        const Salt& salt);

}  // namespace fedea::secagg

#endif
