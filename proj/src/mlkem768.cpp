/*
 * Copyright 2026 The qsnet Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// ML-KEM-768 as specified in FIPS 203: K-PKE over the NTT domain plus the
// Fujisaki-Okamoto transform with implicit rejection. Arithmetic favors
// clarity over speed; the protocol spends single-digit milliseconds per
// handshake, which is far below the latency budget.

#include "qsnet/mlkem768.hpp"

#include <array>
#include <cstring>

#include "qsnet/errors.hpp"
#include "qsnet/hash.hpp"

namespace qsnet::mlkem768 {

namespace {

constexpr int kN = 256;
constexpr int kQ = 3329;
constexpr int kK = 3;
constexpr int kEta1 = 2;
constexpr int kEta2 = 2;
constexpr int kDu = 10;
constexpr int kDv = 4;
constexpr int kInv128 = 3303;  // 128^-1 mod q

using Poly = std::array<std::int32_t, kN>;
using PolyVec = std::array<Poly, kK>;

int mod_q(std::int64_t x) {
  int r = static_cast<int>(x % kQ);
  return r < 0 ? r + kQ : r;
}

// zeta^BitRev7(i) and zeta^(2*BitRev7(i)+1) tables, zeta = 17.
struct ZetaTables {
  std::array<int, 128> ntt;    // used by NTT / inverse NTT
  std::array<int, 128> gamma;  // used by BaseCaseMultiply
  ZetaTables() {
    auto bitrev7 = [](int v) {
      int r = 0;
      for (int b = 0; b < 7; ++b)
        if (v & (1 << b)) r |= 1 << (6 - b);
      return r;
    };
    std::array<int, 256> pow{};
    pow[0] = 1;
    for (int i = 1; i < 256; ++i) pow[i] = mod_q(static_cast<std::int64_t>(pow[i - 1]) * 17);
    for (int i = 0; i < 128; ++i) {
      ntt[i] = pow[bitrev7(i)];
      gamma[i] = pow[(2 * bitrev7(i) + 1) % 256];
    }
  }
};

const ZetaTables& zetas() {
  static const ZetaTables tables;
  return tables;
}

// --- bit packing -----------------------------------------------------------

// ByteEncode_d: d-bit integers to bytes, little-endian bit order.
void byte_encode(int d, const Poly& f, Bytes& out) {
  std::uint32_t acc = 0;
  int bits = 0;
  for (int i = 0; i < kN; ++i) {
    acc |= static_cast<std::uint32_t>(f[i]) << bits;
    bits += d;
    while (bits >= 8) {
      out.push_back(static_cast<std::uint8_t>(acc & 0xFF));
      acc >>= 8;
      bits -= 8;
    }
  }
}

Poly byte_decode(int d, BytesView in) {
  Poly f{};
  std::uint32_t acc = 0;
  int bits = 0;
  std::size_t pos = 0;
  const std::uint32_t mask = (1u << d) - 1;
  for (int i = 0; i < kN; ++i) {
    while (bits < d) {
      acc |= static_cast<std::uint32_t>(in[pos++]) << bits;
      bits += 8;
    }
    f[i] = static_cast<std::int32_t>(acc & mask);
    acc >>= d;
    bits -= d;
  }
  return f;
}

int compress(int d, int x) {
  // round(2^d / q * x) mod 2^d
  return static_cast<int>(((static_cast<std::uint32_t>(x) << d) + kQ / 2) / kQ) &
         ((1 << d) - 1);
}

int decompress(int d, int y) {
  // round(q / 2^d * y)
  return static_cast<int>((static_cast<std::uint32_t>(y) * kQ + (1u << (d - 1))) >> d);
}

// --- sampling --------------------------------------------------------------

// SampleNTT: rejection-sample a polynomial in the NTT domain from
// SHAKE128(rho || j || i). SHAKE output is a prefix-stable stream, so when
// the initial squeeze runs short we re-squeeze a longer prefix and continue.
Poly sample_ntt(BytesView seed34) {
  Poly a{};
  std::size_t len = 672;  // 4 SHAKE128 blocks; almost always sufficient
  Bytes stream = shake128(seed34, len);
  std::size_t pos = 0;
  int count = 0;
  while (count < kN) {
    if (pos + 3 > stream.size()) {
      len *= 2;
      stream = shake128(seed34, len);
    }
    int d1 = stream[pos] + 256 * (stream[pos + 1] & 0x0F);
    int d2 = (stream[pos + 1] >> 4) + 16 * stream[pos + 2];
    pos += 3;
    if (d1 < kQ) a[count++] = d1;
    if (count < kN && d2 < kQ) a[count++] = d2;
  }
  return a;
}

// SamplePolyCBD_eta over 64*eta bytes of PRF output.
Poly sample_cbd(int eta, BytesView buf) {
  Poly f{};
  auto bit = [&](std::size_t idx) { return (buf[idx >> 3] >> (idx & 7)) & 1; };
  for (int i = 0; i < kN; ++i) {
    int x = 0, y = 0;
    for (int j = 0; j < eta; ++j) {
      x += bit(static_cast<std::size_t>(2 * i * eta + j));
      y += bit(static_cast<std::size_t>(2 * i * eta + eta + j));
    }
    f[i] = mod_q(x - y);
  }
  return f;
}

Bytes prf(int eta, BytesView s, std::uint8_t b) {
  Bytes in(s.begin(), s.end());
  in.push_back(b);
  return shake256(in, static_cast<std::size_t>(64 * eta));
}

// --- NTT -------------------------------------------------------------------

void ntt(Poly& f) {
  const auto& z = zetas().ntt;
  int i = 1;
  for (int len = 128; len >= 2; len /= 2) {
    for (int start = 0; start < kN; start += 2 * len) {
      int zeta = z[i++];
      for (int j = start; j < start + len; ++j) {
        int t = mod_q(static_cast<std::int64_t>(zeta) * f[j + len]);
        f[j + len] = mod_q(f[j] - t);
        f[j] = mod_q(f[j] + t);
      }
    }
  }
}

void inv_ntt(Poly& f) {
  const auto& z = zetas().ntt;
  int i = 127;
  for (int len = 2; len <= 128; len *= 2) {
    for (int start = 0; start < kN; start += 2 * len) {
      int zeta = z[i--];
      for (int j = start; j < start + len; ++j) {
        int t = f[j];
        f[j] = mod_q(t + f[j + len]);
        f[j + len] = mod_q(static_cast<std::int64_t>(zeta) * (f[j + len] - t));
      }
    }
  }
  for (auto& c : f) c = mod_q(static_cast<std::int64_t>(c) * kInv128);
}

Poly multiply_ntts(const Poly& f, const Poly& g) {
  const auto& gm = zetas().gamma;
  Poly h{};
  for (int i = 0; i < 128; ++i) {
    std::int64_t a0 = f[2 * i], a1 = f[2 * i + 1];
    std::int64_t b0 = g[2 * i], b1 = g[2 * i + 1];
    h[2 * i] = mod_q(a0 * b0 + mod_q(a1 * b1) * gm[i]);
    h[2 * i + 1] = mod_q(a0 * b1 + a1 * b0);
  }
  return h;
}

Poly poly_add(const Poly& a, const Poly& b) {
  Poly r{};
  for (int i = 0; i < kN; ++i) r[i] = mod_q(a[i] + b[i]);
  return r;
}

Poly poly_sub(const Poly& a, const Poly& b) {
  Poly r{};
  for (int i = 0; i < kN; ++i) r[i] = mod_q(a[i] - b[i]);
  return r;
}

// Dot product in the NTT domain: sum_i multiply_ntts(a[i], b[i]).
Poly polyvec_dot(const PolyVec& a, const PolyVec& b) {
  Poly acc{};
  for (int i = 0; i < kK; ++i) acc = poly_add(acc, multiply_ntts(a[i], b[i]));
  return acc;
}

// --- K-PKE -----------------------------------------------------------------

using Matrix = std::array<PolyVec, kK>;

// A_hat[i][j] <- SampleNTT(rho || j || i)
Matrix expand_matrix(BytesView rho) {
  Matrix a{};
  for (int i = 0; i < kK; ++i) {
    for (int j = 0; j < kK; ++j) {
      Bytes seed(rho.begin(), rho.end());
      seed.push_back(static_cast<std::uint8_t>(j));
      seed.push_back(static_cast<std::uint8_t>(i));
      a[i][j] = sample_ntt(seed);
    }
  }
  return a;
}

struct PkeKeyPair {
  Bytes ek;  // ByteEncode12(t_hat) || rho   (1184 octets)
  Bytes dk;  // ByteEncode12(s_hat)          (1152 octets)
};

PkeKeyPair pke_keygen(BytesView d) {
  Bytes seed(d.begin(), d.end());
  seed.push_back(static_cast<std::uint8_t>(kK));  // FIPS 203 domain separation
  Bytes g = sha3_512(seed);
  BytesView rho(g.data(), 32), sigma(g.data() + 32, 32);

  Matrix a = expand_matrix(rho);

  std::uint8_t n = 0;
  PolyVec s{}, e{};
  for (int i = 0; i < kK; ++i) s[i] = sample_cbd(kEta1, prf(kEta1, sigma, n++));
  for (int i = 0; i < kK; ++i) e[i] = sample_cbd(kEta1, prf(kEta1, sigma, n++));
  for (auto& p : s) ntt(p);
  for (auto& p : e) ntt(p);

  PolyVec t{};
  for (int i = 0; i < kK; ++i) t[i] = poly_add(polyvec_dot(a[i], s), e[i]);

  PkeKeyPair kp;
  kp.ek.reserve(kPublicKeyLen);
  for (const auto& p : t) byte_encode(12, p, kp.ek);
  kp.ek.insert(kp.ek.end(), rho.begin(), rho.end());
  kp.dk.reserve(384 * kK);
  for (const auto& p : s) byte_encode(12, p, kp.dk);
  return kp;
}

Bytes pke_encrypt(BytesView ek, BytesView m, BytesView r) {
  PolyVec t{};
  for (int i = 0; i < kK; ++i)
    t[i] = byte_decode(12, ek.subspan(static_cast<std::size_t>(384 * i), 384));
  BytesView rho = ek.subspan(static_cast<std::size_t>(384 * kK), 32);
  Matrix a = expand_matrix(rho);

  std::uint8_t n = 0;
  PolyVec y{}, e1{};
  for (int i = 0; i < kK; ++i) y[i] = sample_cbd(kEta1, prf(kEta1, r, n++));
  for (int i = 0; i < kK; ++i) e1[i] = sample_cbd(kEta2, prf(kEta2, r, n++));
  Poly e2 = sample_cbd(kEta2, prf(kEta2, r, n++));
  for (auto& p : y) ntt(p);

  // u = InvNTT(A^T o y) + e1
  PolyVec u{};
  for (int i = 0; i < kK; ++i) {
    PolyVec col{};
    for (int j = 0; j < kK; ++j) col[j] = a[j][i];
    u[i] = polyvec_dot(col, y);
    inv_ntt(u[i]);
    u[i] = poly_add(u[i], e1[i]);
  }

  Poly mu{};
  Poly mbits = byte_decode(1, m);
  for (int i = 0; i < kN; ++i) mu[i] = decompress(1, mbits[i]);

  Poly v = polyvec_dot(t, y);
  inv_ntt(v);
  v = poly_add(poly_add(v, e2), mu);

  Bytes c;
  c.reserve(kCiphertextLen);
  for (int i = 0; i < kK; ++i) {
    Poly cu{};
    for (int j = 0; j < kN; ++j) cu[j] = compress(kDu, u[i][j]);
    byte_encode(kDu, cu, c);
  }
  Poly cv{};
  for (int j = 0; j < kN; ++j) cv[j] = compress(kDv, v[j]);
  byte_encode(kDv, cv, c);
  return c;
}

Bytes pke_decrypt(BytesView dk, BytesView c) {
  constexpr std::size_t u_bytes = 32 * kDu;  // per polynomial
  PolyVec u{};
  for (int i = 0; i < kK; ++i) {
    Poly cu = byte_decode(kDu, c.subspan(static_cast<std::size_t>(i) * u_bytes, u_bytes));
    for (int j = 0; j < kN; ++j) u[i][j] = decompress(kDu, cu[j]);
  }
  Poly v{};
  {
    Poly cv = byte_decode(kDv, c.subspan(static_cast<std::size_t>(kK) * u_bytes, 32 * kDv));
    for (int j = 0; j < kN; ++j) v[j] = decompress(kDv, cv[j]);
  }
  PolyVec s{};
  for (int i = 0; i < kK; ++i)
    s[i] = byte_decode(12, dk.subspan(static_cast<std::size_t>(384 * i), 384));

  for (auto& p : u) ntt(p);
  Poly w = polyvec_dot(s, u);
  inv_ntt(w);
  w = poly_sub(v, w);

  Poly mbits{};
  for (int i = 0; i < kN; ++i) mbits[i] = compress(1, w[i]);
  Bytes m;
  m.reserve(32);
  byte_encode(1, mbits, m);
  return m;
}

void check_public_key(BytesView ek) {
  if (ek.size() != kPublicKeyLen)
    throw Error(Errc::MalformedPublicKey,
                "expected " + std::to_string(kPublicKeyLen) + " octets, got " +
                    std::to_string(ek.size()));
  // Modulus check: encode(decode(ek)) must reproduce the input.
  Bytes re;
  re.reserve(384 * kK);
  for (int i = 0; i < kK; ++i) {
    Poly p = byte_decode(12, ek.subspan(static_cast<std::size_t>(384 * i), 384));
    for (auto c : p)
      if (c >= kQ) throw Error(Errc::MalformedPublicKey, "coefficient out of range");
    byte_encode(12, p, re);
  }
  if (std::memcmp(re.data(), ek.data(), re.size()) != 0)
    throw Error(Errc::MalformedPublicKey, "non-canonical encoding");
}

}  // namespace

KeyPair keygen_from_seed(BytesView d, BytesView z) {
  if (d.size() != kSeedLen || z.size() != kSeedLen)
    throw Error(Errc::KemFailure, "keygen seeds must be 32 octets");
  PkeKeyPair pke = pke_keygen(d);
  KeyPair kp;
  kp.public_key = pke.ek;
  kp.secret_key = std::move(pke.dk);
  kp.secret_key.insert(kp.secret_key.end(), pke.ek.begin(), pke.ek.end());
  Bytes h = sha3_256(pke.ek);
  kp.secret_key.insert(kp.secret_key.end(), h.begin(), h.end());
  kp.secret_key.insert(kp.secret_key.end(), z.begin(), z.end());
  return kp;
}

KeyPair keygen(RandomSource& rng) {
  Bytes d = rng.bytes(kSeedLen);
  Bytes z = rng.bytes(kSeedLen);
  KeyPair kp = keygen_from_seed(d, z);
  secure_wipe(d);
  secure_wipe(z);
  return kp;
}

EncapsResult encapsulate_with_message(BytesView public_key, BytesView m) {
  check_public_key(public_key);
  if (m.size() != 32) throw Error(Errc::KemFailure, "message must be 32 octets");
  Bytes km(m.begin(), m.end());
  Bytes h = sha3_256(public_key);
  km.insert(km.end(), h.begin(), h.end());
  Bytes g = sha3_512(km);  // (K, r)
  EncapsResult res;
  res.shared_secret.assign(g.begin(), g.begin() + 32);
  res.ciphertext = pke_encrypt(public_key, m, BytesView(g.data() + 32, 32));
  secure_wipe(g);
  return res;
}

EncapsResult encapsulate(BytesView public_key, RandomSource& rng) {
  Bytes m = rng.bytes(32);
  EncapsResult res = encapsulate_with_message(public_key, m);
  secure_wipe(m);
  return res;
}

Bytes decapsulate(BytesView secret_key, BytesView ciphertext) {
  if (secret_key.size() != kSecretKeyLen)
    throw Error(Errc::MalformedSecretKey,
                "expected " + std::to_string(kSecretKeyLen) + " octets");
  if (ciphertext.size() != kCiphertextLen)
    throw Error(Errc::MalformedCiphertext,
                "expected " + std::to_string(kCiphertextLen) + " octets, got " +
                    std::to_string(ciphertext.size()));

  BytesView dk_pke = secret_key.subspan(0, 384 * kK);
  BytesView ek = secret_key.subspan(384 * kK, kPublicKeyLen);
  BytesView h = secret_key.subspan(384 * kK + kPublicKeyLen, 32);
  BytesView z = secret_key.subspan(384 * kK + kPublicKeyLen + 32, 32);

  // Hash check from FIPS 203 input validation.
  if (!ct_equal(sha3_256(ek), h))
    throw Error(Errc::MalformedSecretKey, "hash check failed");

  Bytes m = pke_decrypt(dk_pke, ciphertext);
  Bytes km = m;
  km.insert(km.end(), h.begin(), h.end());
  Bytes g = sha3_512(km);  // (K', r')
  Bytes k_prime(g.begin(), g.begin() + 32);

  Bytes zc(z.begin(), z.end());
  zc.insert(zc.end(), ciphertext.begin(), ciphertext.end());
  Bytes k_bar = shake256(zc, 32);  // implicit-rejection secret

  Bytes c_prime = pke_encrypt(ek, m, BytesView(g.data() + 32, 32));
  bool ok = ct_equal(c_prime, ciphertext);
  secure_wipe(m);
  secure_wipe(g);
  if (!ok) {
    secure_wipe(k_prime);
    return k_bar;
  }
  secure_wipe(k_bar);
  return k_prime;
}

}  // namespace qsnet::mlkem768
