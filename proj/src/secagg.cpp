#include "fedea/secagg.hpp"

#include <openssl/bn.h>
#include <openssl/evp.h>

#include <algorithm>
#include <cstring>
#include <stdexcept>

namespace fedea::secagg {

namespace {

// 64-bit safe prime for fast tests: p = 2q + 1, g = 4 = 2^2 generates the
// order-q subgroup.
constexpr const char* kTest64PHex = "8000000000000a77";
constexpr const char* kTest64QHex = "400000000000053b";

// RFC 3526 MODP primes, taken from OpenSSL. They are safe primes with
// p = 7 (mod 8), so g = 2 is a quadratic residue and generates the order-q
// subgroup.
Bigint rfc3526_prime(int bits) {
    BIGNUM* bn = bits == 2048 ? BN_get_rfc3526_prime_2048(nullptr)
                              : BN_get_rfc3526_prime_3072(nullptr);
    if (bn == nullptr) throw std::runtime_error("rfc3526_prime: OpenSSL lookup failed");
    char* hex = BN_bn2hex(bn);
    Bigint p = Bigint::from_hex(hex);
    OPENSSL_free(hex);
    BN_free(bn);
    return p;
}

void sha256(const std::uint8_t* data, std::size_t len, std::uint8_t out[32]) {
    unsigned int out_len = 32;
    if (EVP_Digest(data, len, out, &out_len, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("sha256: digest failure");
}

std::vector<std::uint8_t> export_fixed_width(const Bigint& v, std::size_t width) {
    // Big-endian with left zero-padding to a fixed width.
    std::vector<std::uint8_t> raw(mpz_sizeinbase(v.raw(), 256), 0);
    std::size_t count = 0;
    mpz_export(raw.data(), &count, 1, 1, 1, 0, v.raw());
    if (count > width) throw std::invalid_argument("export_fixed_width: value too wide");
    std::vector<std::uint8_t> buf(width, 0);
    std::copy(raw.begin(), raw.begin() + static_cast<std::ptrdiff_t>(count),
              buf.begin() + static_cast<std::ptrdiff_t>(width - count));
    return buf;
}

void append_u32(std::vector<std::uint8_t>& buf, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) buf.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void append_u64(std::vector<std::uint8_t>& buf, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) buf.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::vector<std::uint8_t> salt_bytes(const Salt& salt) {
    std::vector<std::uint8_t> buf;
    buf.reserve(24);
    append_u32(buf, salt.round);
    append_u32(buf, salt.iteration);
    buf.insert(buf.end(), salt.nonce.begin(), salt.nonce.end());
    return buf;
}

}  // namespace

Bigint Bigint::from_hex(const std::string& hex) {
    Bigint b;
    if (mpz_set_str(b.v_, hex.c_str(), 16) != 0)
        throw std::invalid_argument("Bigint::from_hex: invalid hex string");
    return b;
}

Bigint Bigint::from_dec(const std::string& dec) {
    Bigint b;
    if (mpz_set_str(b.v_, dec.c_str(), 10) != 0)
        throw std::invalid_argument("Bigint::from_dec: invalid decimal string");
    return b;
}

std::string Bigint::to_hex() const {
    char* s = mpz_get_str(nullptr, 16, v_);
    std::string out(s);
    void (*freefunc)(void*, std::size_t);
    mp_get_memory_functions(nullptr, nullptr, &freefunc);
    freefunc(s, std::strlen(s) + 1);
    return out;
}

std::string Bigint::to_dec() const {
    char* s = mpz_get_str(nullptr, 10, v_);
    std::string out(s);
    void (*freefunc)(void*, std::size_t);
    mp_get_memory_functions(nullptr, nullptr, &freefunc);
    freefunc(s, std::strlen(s) + 1);
    return out;
}

Bigint mod_exp(const Bigint& base, const Bigint& exp, const Bigint& modulus) {
    Bigint out;
    mpz_powm(out.raw(), base.raw(), exp.raw(), modulus.raw());
    return out;
}

GroupPreset parse_group_preset(const std::string& name) {
    if (name == "test-64bit") return GroupPreset::Test64;
    if (name == "rfc-2048") return GroupPreset::Rfc2048;
    if (name == "rfc-3072") return GroupPreset::Rfc3072;
    throw std::invalid_argument("unknown group preset: " + name);
}

std::string to_string(GroupPreset preset) {
    switch (preset) {
        case GroupPreset::Test64: return "test-64bit";
        case GroupPreset::Rfc2048: return "rfc-2048";
        case GroupPreset::Rfc3072: return "rfc-3072";
    }
    return "?";
}

GroupParams gen_group_params(GroupPreset preset) {
    GroupParams gp;
    switch (preset) {
        case GroupPreset::Test64:
            gp.p = Bigint::from_hex(kTest64PHex);
            gp.q = Bigint::from_hex(kTest64QHex);
            gp.g = Bigint(4);
            break;
        case GroupPreset::Rfc2048:
        case GroupPreset::Rfc3072: {
            gp.p = rfc3526_prime(preset == GroupPreset::Rfc2048 ? 2048 : 3072);
            mpz_sub_ui(gp.q.raw(), gp.p.raw(), 1);
            mpz_fdiv_q_ui(gp.q.raw(), gp.q.raw(), 2);
            gp.g = Bigint(2);
            break;
        }
    }
    return gp;
}

bool validate_group(const GroupParams& gp) {
    if (!gp.p.is_probable_prime() || !gp.q.is_probable_prime()) return false;
    Bigint two_q_plus_1;
    mpz_mul_ui(two_q_plus_1.raw(), gp.q.raw(), 2);
    mpz_add_ui(two_q_plus_1.raw(), two_q_plus_1.raw(), 1);
    if (!(two_q_plus_1 == gp.p)) return false;
    if (gp.g == Bigint(1)) return false;
    return mod_exp(gp.g, gp.q, gp.p) == Bigint(1);
}

KeyPair keygen(const GroupParams& params, std::uint64_t seed) {
    // Expand the seed into twice the bit length of q, reduce mod (q-1), add 1:
    // deterministic and uniform in [1, q-1] up to a negligible modulo bias.
    const std::size_t bytes_needed = 2 * ((params.q.bit_length() + 7) / 8) + 8;
    std::vector<std::uint8_t> stream;
    stream.reserve(bytes_needed + 32);
    std::uint64_t counter = 0;
    while (stream.size() < bytes_needed) {
        std::vector<std::uint8_t> block;
        block.reserve(24);
        for (int i = 0; i < 8; ++i) block.push_back(static_cast<std::uint8_t>(seed >> (8 * i)));
        block.push_back('k');
        block.push_back('g');
        append_u64(block, counter++);
        std::uint8_t digest[32];
        sha256(block.data(), block.size(), digest);
        stream.insert(stream.end(), digest, digest + 32);
    }
    Bigint r;
    mpz_import(r.raw(), bytes_needed, 1, 1, 1, 0, stream.data());
    Bigint q_minus_1;
    mpz_sub_ui(q_minus_1.raw(), params.q.raw(), 1);
    Bigint secret;
    mpz_mod(secret.raw(), r.raw(), q_minus_1.raw());
    mpz_add_ui(secret.raw(), secret.raw(), 1);
    return keypair_from_secret(params, secret);
}

KeyPair keypair_from_secret(const GroupParams& params, const Bigint& secret) {
    KeyPair kp;
    kp.secret_exponent = secret;
    kp.public_key = mod_exp(params.g, secret, params.p);
    return kp;
}

SharedKey derive_shared_key(const GroupParams& params, const Bigint& my_secret,
                            const Bigint& peer_public) {
    Bigint p_minus_1;
    mpz_sub_ui(p_minus_1.raw(), params.p.raw(), 1);
    if (!(Bigint(1) < peer_public) || !(peer_public < p_minus_1))
        throw std::invalid_argument("derive_shared_key: degenerate peer public key");
    // When g generates the prime-order subgroup, require membership there to
    // rule out small-subgroup elements.
    if (mod_exp(params.g, params.q, params.p) == Bigint(1) &&
        !(mod_exp(peer_public, params.q, params.p) == Bigint(1)))
        throw std::invalid_argument("derive_shared_key: peer public key fails subgroup check");

    const Bigint shared = mod_exp(peer_public, my_secret, params.p);
    const std::size_t width = (params.p.bit_length() + 7) / 8;
    const auto bytes = export_fixed_width(shared, width);
    SharedKey key{};
    sha256(bytes.data(), bytes.size(), key.data());
    return key;
}

std::string to_hex(const SharedKey& key) {
    static const char* digits = "0123456789abcdef";
    std::string out;
    out.reserve(64);
    for (std::uint8_t b : key) {
        out.push_back(digits[b >> 4]);
        out.push_back(digits[b & 0xf]);
    }
    return out;
}

Salt make_salt(std::uint32_t round, std::uint32_t iteration, Rng& rng) {
    Salt s;
    s.round = round;
    s.iteration = iteration;
    for (std::size_t i = 0; i < s.nonce.size(); i += 8) {
        const std::uint64_t w = rng.next_u64();
        for (std::size_t b = 0; b < 8; ++b)
            s.nonce[i + b] = static_cast<std::uint8_t>(w >> (8 * b));
    }
    return s;
}

std::vector<double> mask_stream(const SharedKey& key, const Salt& salt, std::size_t count,
                                double scale) {
    if (scale < 0.0) throw std::invalid_argument("mask_stream: scale must be nonnegative");
    std::vector<double> out(count, 0.0);
    if (scale == 0.0 || count == 0) return out;

    const auto sb = salt_bytes(salt);
    std::vector<std::uint8_t> block(key.size() + sb.size() + 8);
    std::memcpy(block.data(), key.data(), key.size());
    std::memcpy(block.data() + key.size(), sb.data(), sb.size());

    std::size_t produced = 0;
    std::uint64_t counter = 0;
    std::uint8_t digest[32];
    while (produced < count) {
        for (int i = 0; i < 8; ++i)
            block[key.size() + sb.size() + i] = static_cast<std::uint8_t>(counter >> (8 * i));
        ++counter;
        sha256(block.data(), block.size(), digest);
        for (int w = 0; w < 4 && produced < count; ++w) {
            std::uint64_t u = 0;
            for (int b = 0; b < 8; ++b)
                u |= static_cast<std::uint64_t>(digest[8 * w + b]) << (8 * b);
            out[produced++] = static_cast<double>(u >> 11) * 0x1.0p-53 * scale;
        }
    }
    return out;
}

Matrix compute_mask(int my_id, const Keyring& keyring, const Salt& salt, std::size_t rows,
                    std::size_t cols, const MaskScale& scale, std::size_t expected_peers) {
    if (keyring.shared.size() != expected_peers)
        throw std::invalid_argument("compute_mask: incomplete keyring");
    if (scale.per_column.size() != cols)
        throw std::invalid_argument("compute_mask: scale column-count mismatch");
    Matrix mask(rows, cols);
    const bool all_zero = std::all_of(scale.per_column.begin(), scale.per_column.end(),
                                      [](double s) { return s == 0.0; });
    if (all_zero) return mask;
    const std::size_t count = rows * cols;
    for (const auto& [peer, key] : keyring.shared) {
        if (peer == my_id) throw std::invalid_argument("compute_mask: keyring contains owner");
        // Unit-scale stream for the unordered pair, scaled per column below.
        const auto stream = mask_stream(key, salt, count, 1.0);
        const double sign = (peer > my_id) ? 1.0 : -1.0;
        std::size_t idx = 0;
        for (std::size_t r = 0; r < rows; ++r)
            for (std::size_t c = 0; c < cols; ++c, ++idx)
                mask(r, c) += sign * stream[idx] * scale.per_column[c];
    }
    return mask;
}

Matrix unmask_aggregate(const std::vector<MaskedObjectiveMatrix>& masked_from_others,
                        const Matrix& own_prediction, const Matrix& own_mask, int own_id,
                        const Salt& salt) {
    std::map<int, const MaskedObjectiveMatrix*> by_sender;
    for (const auto& m : masked_from_others) {
        if (!(m.salt == salt))
            throw std::invalid_argument("unmask_aggregate: salt mismatch (replay or misrouting)");
        if (m.values.rows() != own_prediction.rows() || m.values.cols() != own_prediction.cols())
            throw std::invalid_argument("unmask_aggregate: shape mismatch");
        if (!by_sender.emplace(m.sender, &m).second)
            throw std::invalid_argument("unmask_aggregate: duplicate sender");
    }
    if (own_mask.rows() != own_prediction.rows() || own_mask.cols() != own_prediction.cols())
        throw std::invalid_argument("unmask_aggregate: own-mask shape mismatch");

    // Accumulate in client-id order so a zero-scale run reproduces the
    // plaintext summation order exactly.
    Matrix acc(own_prediction.rows(), own_prediction.cols());
    bool own_added = false;
    auto add_own = [&] {
        for (std::size_t i = 0; i < acc.size(); ++i)
            acc.data()[i] += own_prediction.data()[i] + own_mask.data()[i];
        own_added = true;
    };
    for (const auto& [sender, m] : by_sender) {
        if (!own_added && own_id < sender) add_own();
        acc += m->values;
    }
    if (!own_added) add_own();
    return acc;
}

}  // namespace fedea::secagg
