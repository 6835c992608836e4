#pragma once

// Exact arithmetic in the unramified coefficient ring O_E = W(F_{p^f}) at
// finite p-precision N: elements are length-f coefficient vectors over
// Z/p^N with respect to the power basis of a fixed monic modulus that is
// irreducible mod p.  The Frobenius lift sigma is the unique ring
// automorphism reducing to x -> x^p mod p; sigma^f = id.

#include "wachlab/big.hpp"

#include <memory>
#include <random>
#include <vector>

namespace wachlab {

namespace detail {

// Dense polynomial arithmetic over F_p, used only to pick the field modulus
// and to seed inversions/Frobenius lifts.
using FpPoly = std::vector<long long>;  // coefficient i of x^i, values in [0,p)

inline void fp_trim(FpPoly& a) {
    while (!a.empty() && a.back() == 0) a.pop_back();
}

inline FpPoly fp_mul(const FpPoly& a, const FpPoly& b, long long p) {
    if (a.empty() || b.empty()) return {};
    FpPoly c(a.size() + b.size() - 1, 0);
    for (size_t i = 0; i < a.size(); ++i)
        for (size_t j = 0; j < b.size(); ++j) c[i + j] = (c[i + j] + a[i] * b[j]) % p;
    fp_trim(c);
    return c;
}

inline FpPoly fp_mod(FpPoly a, const FpPoly& m, long long p) {
    // m monic
    fp_trim(a);
    long long dm = (long long)m.size() - 1;
    while ((long long)a.size() - 1 >= dm) {
        long long lead = a.back();
        long long shift = (long long)a.size() - 1 - dm;
        for (long long i = 0; i <= dm; ++i) {
            long long idx = i + shift;
            a[idx] = ((a[idx] - lead * m[i]) % p + p) % p;
        }
        fp_trim(a);
    }
    return a;
}

inline FpPoly fp_powmod(FpPoly base, BigInt e, const FpPoly& m, long long p) {
    FpPoly r = {1};
    base = fp_mod(std::move(base), m, p);
    while (e > 0) {
        if ((e & 1) != 0) r = fp_mod(fp_mul(r, base, p), m, p);
        base = fp_mod(fp_mul(base, base, p), m, p);
        e >>= 1;
    }
    return r;
}

inline FpPoly fp_gcd(FpPoly a, FpPoly b, long long p) {
    fp_trim(a);
    fp_trim(b);
    while (!b.empty()) {
        // make b monic for fp_mod
        long long lead = b.back();
        if (lead != 1) {
            long long inv = 1;
            for (long long x = 1; x < p; ++x)
                if (lead * x % p == 1) {
                    inv = x;
                    break;
                }
            for (auto& c : b) c = c * inv % p;
        }
        FpPoly r = fp_mod(a, b, p);
        a = std::move(b);
        b = std::move(r);
    }
    return a;
}

inline bool fp_irreducible(const FpPoly& g, long long p) {
    long long f = (long long)g.size() - 1;
    if (f < 1) return false;
    if (f == 1) return true;
    // x^{p^f} == x mod g, and for every prime r | f: gcd(x^{p^{f/r}} - x, g) = 1
    FpPoly x = {0, 1};
    FpPoly xp = fp_powmod(x, pow_big(p, f), g, p);
    FpPoly diff = xp;
    diff.resize(std::max<size_t>(diff.size(), 2), 0);
    diff[1] = ((diff[1] - 1) % p + p) % p;
    fp_trim(diff);
    if (!diff.empty()) return false;
    long long n = f;
    for (long long r = 2; r * r <= n; ++r) {
        if (n % r == 0) {
            while (n % r == 0) n /= r;
            FpPoly y = fp_powmod(x, pow_big(p, f / r), g, p);
            FpPoly d = y;
            d.resize(std::max<size_t>(d.size(), 2), 0);
            d[1] = ((d[1] - 1) % p + p) % p;
            if (!fp_gcd(d, g, p).empty() && fp_gcd(d, g, p).size() > 1) return false;
        }
    }
    if (n > 1) {
        FpPoly y = fp_powmod(x, pow_big(p, f / n), g, p);
        FpPoly d = y;
        d.resize(std::max<size_t>(d.size(), 2), 0);
        d[1] = ((d[1] - 1) % p + p) % p;
        if (!fp_gcd(d, g, p).empty() && fp_gcd(d, g, p).size() > 1) return false;
    }
    return true;
}

inline bool is_odd_prime(long long p) {
    if (p < 3 || p % 2 == 0) return false;
    for (long long d = 3; d * d <= p; d += 2)
        if (p % d == 0) return false;
    return true;
}

}  // namespace detail

class FieldCtx;
using FieldCtxPtr = std::shared_ptr<const FieldCtx>;

class UnramElem;

class FieldCtx : public std::enable_shared_from_this<FieldCtx> {
  public:
    long long p;
    int a;  // degree of K over Q_p
    int f;  // degree of E over Q_p, a | f
    int N;  // elements known mod p^N
    BigInt pN;
    std::vector<BigInt> modulus;  // monic degree-f; modulus[i] = coefficient of x^i, leading 1 implicit

    // frob_pow_table[t][i] = coefficients of (sigma^t(x))^i for 0 <= t < f, 0 <= i < f
    std::vector<std::vector<std::vector<BigInt>>> frob_pow_table;

    static FieldCtxPtr make(long long p, int a, int f, int N);

    // Same residue field and modulus, different p-precision.  Deterministic:
    // the Hensel-lifted data at precision N' reduces to the data at N.
    FieldCtxPtr with_precision(int Nprime) const { return make(p, a, f, Nprime); }

    UnramElem zero() const;
    UnramElem one() const;
    UnramElem from_scalar(const BigInt& c) const;
    UnramElem gen() const;  // the power-basis generator x (zero when f == 1)
    UnramElem from_coeffs(std::vector<BigInt> c) const;

    std::vector<BigInt> frob_image() const {
        return f > 1 ? frob_pow_table[1 % f][1] : std::vector<BigInt>{BigInt(0)};
    }

  private:
    FieldCtx() = default;
};

class UnramElem {
  public:
    FieldCtxPtr ctx;
    std::vector<BigInt> c;  // length f, residues in [0, p^N)

    UnramElem() = default;
    UnramElem(FieldCtxPtr ctx_, std::vector<BigInt> coeffs) : ctx(std::move(ctx_)), c(std::move(coeffs)) {
        if ((int)c.size() != ctx->f) throw input_error("UnramElem: wrong coefficient count");
        for (auto& x : c) x = mod_reduce(x, ctx->pN);
    }

    UnramElem zero_like() const { return ctx->zero(); }
    UnramElem one_like() const { return ctx->one(); }

    bool is_zero() const {
        for (const auto& x : c)
            if (x != 0) return false;
        return true;
    }

    friend UnramElem operator+(const UnramElem& a, const UnramElem& b) {
        a.check_ctx(b);
        std::vector<BigInt> r(a.c.size());
        for (size_t i = 0; i < r.size(); ++i) r[i] = mod_reduce(a.c[i] + b.c[i], a.ctx->pN);
        return UnramElem(a.ctx, std::move(r));
    }
    friend UnramElem operator-(const UnramElem& a, const UnramElem& b) {
        a.check_ctx(b);
        std::vector<BigInt> r(a.c.size());
        for (size_t i = 0; i < r.size(); ++i) r[i] = mod_reduce(a.c[i] - b.c[i], a.ctx->pN);
        return UnramElem(a.ctx, std::move(r));
    }
    friend UnramElem operator-(const UnramElem& a) { return a.ctx->zero() - a; }

    friend UnramElem operator*(const UnramElem& a, const UnramElem& b) {
        a.check_ctx(b);
        const int f = a.ctx->f;
        const BigInt& pN = a.ctx->pN;
        std::vector<BigInt> prod(2 * f - 1, BigInt(0));
        for (int i = 0; i < f; ++i) {
            if (a.c[i] == 0) continue;
            for (int j = 0; j < f; ++j) {
                if (b.c[j] == 0) continue;
                prod[i + j] += a.c[i] * b.c[j];
            }
        }
        // reduce by the monic modulus
        for (int d = 2 * f - 2; d >= f; --d) {
            if (prod[d] == 0) continue;
            BigInt lead = prod[d] % pN;
            prod[d] = 0;
            for (int i = 0; i < f; ++i) prod[d - f + i] -= lead * a.ctx->modulus[i];
        }
        prod.resize(f);
        for (auto& x : prod) x = mod_reduce(x, pN);
        return UnramElem(a.ctx, std::move(prod));
    }

    UnramElem& operator+=(const UnramElem& b) { return *this = *this + b; }
    UnramElem& operator-=(const UnramElem& b) { return *this = *this - b; }
    UnramElem& operator*=(const UnramElem& b) { return *this = *this * b; }

    friend bool operator==(const UnramElem& a, const UnramElem& b) {
        a.check_ctx(b);
        return a.c == b.c;
    }
    friend bool operator!=(const UnramElem& a, const UnramElem& b) { return !(a == b); }

    UnramElem scaled(const BigInt& s) const {
        std::vector<BigInt> r(c.size());
        for (size_t i = 0; i < r.size(); ++i) r[i] = mod_reduce(c[i] * s, ctx->pN);
        return UnramElem(ctx, std::move(r));
    }

    // min over coordinates of ord_p; returns N when all coordinates vanish
    // (meaning ">= N").
    int valuation() const {
        int v = ctx->N;
        for (const auto& x : c) v = std::min(v, ord_p_residue(x, ctx->p, ctx->N));
        return v;
    }
    bool is_unit() const { return valuation() == 0; }

    // Exact division by p^k; requires every coordinate divisible.  The result
    // is only guaranteed mod p^{N-k}; coordinates keep the full-width residue.
    UnramElem div_pk(int k) const {
        std::vector<BigInt> r(c.size());
        for (size_t i = 0; i < r.size(); ++i) r[i] = exact_div_pk(c[i], ctx->p, k, "UnramElem::div_pk");
        return UnramElem(ctx, std::move(r));
    }

    UnramElem times_pk(int k) const {
        BigInt pk = pow_big(ctx->p, k);
        return scaled(pk);
    }

    // sigma^t
    UnramElem frobenius(long long t) const {
        const int f = ctx->f;
        int tt = (int)(((t % f) + f) % f);
        if (tt == 0) return *this;
        std::vector<BigInt> r(f, BigInt(0));
        const auto& table = ctx->frob_pow_table[tt];
        for (int i = 0; i < f; ++i) {
            if (c[i] == 0) continue;
            for (int j = 0; j < f; ++j) r[j] += c[i] * table[i][j];
        }
        for (auto& x : r) x = mod_reduce(x, ctx->pN);
        return UnramElem(ctx, std::move(r));
    }

    // Inverse of a unit: F_p inverse by extended gcd, then Newton lifting.
    UnramElem invert() const {
        if (!is_unit()) throw math_error("UnramElem::invert: not a unit (positive valuation)");
        const long long p = ctx->p;
        // inverse mod p via extended gcd of polynomials over F_p
        detail::FpPoly g(ctx->f + 1);
        for (int i = 0; i < ctx->f; ++i) g[i] = (long long)(ctx->modulus[i] % p);
        g[ctx->f] = 1;
        detail::FpPoly e(ctx->f);
        for (int i = 0; i < ctx->f; ++i) e[i] = (long long)(c[i] % p);
        detail::fp_trim(e);
        // extended euclid: find u with u*e == 1 mod g
        detail::FpPoly r0 = g, r1 = e, s0 = {}, s1 = {1};
        while (!r1.empty()) {
            // make r1 monic, divide
            long long lead = r1.back();
            long long linv = 1;
            for (long long x = 1; x < p; ++x)
                if (lead * x % p == 1) {
                    linv = x;
                    break;
                }
            detail::FpPoly r1m = r1, q;
            for (auto& x : r1m) x = x * linv % p;
            // long division r0 = q*r1m + rem
            detail::FpPoly rem = r0;
            detail::fp_trim(rem);
            q.assign(rem.size(), 0);
            while ((long long)rem.size() >= (long long)r1m.size() && !rem.empty()) {
                long long lead2 = rem.back();
                long long shift = (long long)rem.size() - (long long)r1m.size();
                q[shift] = (q[shift] + lead2) % p;
                for (size_t i = 0; i < r1m.size(); ++i) {
                    size_t idx = i + shift;
                    rem[idx] = ((rem[idx] - lead2 * r1m[i]) % p + p) % p;
                }
                detail::fp_trim(rem);
            }
            detail::fp_trim(q);
            for (auto& x : q) x = x * linv % p;
            // (r0, r1) = (r1, rem); (s0, s1) = (s1, s0 - q*s1)
            detail::FpPoly qs = detail::fp_mul(q, s1, p);
            detail::FpPoly s2 = s0;
            s2.resize(std::max(s2.size(), qs.size()), 0);
            for (size_t i = 0; i < qs.size(); ++i) s2[i] = ((s2[i] - qs[i]) % p + p) % p;
            detail::fp_trim(s2);
            r0 = std::move(r1);
            r1 = std::move(rem);
            s0 = std::move(s1);
            s1 = std::move(s2);
        }
        // r0 = gcd (a nonzero constant since e is a unit mod p)
        if (r0.size() != 1) throw math_error("UnramElem::invert: not invertible mod p");
        long long lead = r0[0], linv = 1;
        for (long long x = 1; x < p; ++x)
            if (lead * x % p == 1) {
                linv = x;
                break;
            }
        std::vector<BigInt> y0(ctx->f, BigInt(0));
        for (size_t i = 0; i < s0.size(); ++i) y0[i] = s0[i] * linv % p;
        UnramElem y(ctx, std::move(y0));
        // Newton: y <- y(2 - e*y), doubles p-adic accuracy each round
        int correct = 1;
        UnramElem two = ctx->from_scalar(2);
        while (correct < ctx->N) {
            y = y * (two - (*this) * y);
            correct *= 2;
        }
        return y;
    }

    UnramElem pow(BigInt e) const {
        if (e < 0) return invert().pow(-e);
        UnramElem r = ctx->one(), b = *this;
        while (e > 0) {
            if ((e & 1) != 0) r = r * b;
            b = b * b;
            e >>= 1;
        }
        return r;
    }

    // Reduce to a context of smaller (or equal) precision with the same modulus.
    UnramElem reduced_to(const FieldCtxPtr& c2) const {
        if (c2->p != ctx->p || c2->f != ctx->f) throw input_error("reduced_to: incompatible context");
        if (c2->N > ctx->N) throw input_error("reduced_to: target precision exceeds source");
        std::vector<BigInt> r(c.size());
        for (size_t i = 0; i < r.size(); ++i) r[i] = c[i] % c2->pN;
        return UnramElem(c2, std::move(r));
    }

    void check_ctx(const UnramElem& b) const {
        if (ctx.get() != b.ctx.get()) {
            if (!ctx || !b.ctx || ctx->p != b.ctx->p || ctx->f != b.ctx->f || ctx->N != b.ctx->N)
                throw input_error("UnramElem: context mismatch");
        }
    }
};

inline UnramElem FieldCtx::zero() const {
    return UnramElem(shared_from_this(), std::vector<BigInt>(f, BigInt(0)));
}
inline UnramElem FieldCtx::one() const {
    std::vector<BigInt> v(f, BigInt(0));
    v[0] = 1;
    return UnramElem(shared_from_this(), std::move(v));
}
inline UnramElem FieldCtx::from_scalar(const BigInt& c) const {
    std::vector<BigInt> v(f, BigInt(0));
    v[0] = mod_reduce(c, pN);
    return UnramElem(shared_from_this(), std::move(v));
}
inline UnramElem FieldCtx::gen() const {
    std::vector<BigInt> v(f, BigInt(0));
    if (f > 1) v[1] = 1;
    return UnramElem(shared_from_this(), std::move(v));
}
inline UnramElem FieldCtx::from_coeffs(std::vector<BigInt> c) const {
    return UnramElem(shared_from_this(), std::move(c));
}

inline FieldCtxPtr FieldCtx::make(long long p, int a, int f, int N) {
    if (!detail::is_odd_prime(p)) throw input_error("make_field: p must be an odd prime");
    if (a < 1 || f < 1 || f % a != 0) throw input_error("make_field: need a >= 1 and a | f");
    if (N < 1) throw input_error("make_field: need N >= 1");

    auto ctx = std::shared_ptr<FieldCtx>(new FieldCtx());
    ctx->p = p;
    ctx->a = a;
    ctx->f = f;
    ctx->N = N;
    ctx->pN = pow_big(p, N);

    // Deterministic modulus: lexicographically smallest monic irreducible mod p,
    // comparing the coefficient tuple (c_{f-1}, ..., c_1, c_0).
    detail::FpPoly g(f + 1, 0);
    g[f] = 1;
    bool found = false;
    std::vector<long long> digits(f, 0);  // digits[i] corresponds to c_{f-1-i}
    while (!found) {
        for (int i = 0; i < f; ++i) g[f - 1 - i] = digits[i];
        if (detail::fp_irreducible(g, p)) {
            found = true;
            break;
        }
        int pos = f - 1;
        while (pos >= 0) {
            if (++digits[pos] < p) break;
            digits[pos] = 0;
            --pos;
        }
        if (pos < 0) throw error("make_field: no irreducible modulus found");
    }
    ctx->modulus.assign(f, BigInt(0));
    for (int i = 0; i < f; ++i) ctx->modulus[i] = g[i];

    // Frobenius lift: Hensel the root of the modulus congruent to x^p mod p.
    ctx->frob_pow_table.assign(f, {});
    if (f > 1) {
        detail::FpPoly x = {0, 1};
        detail::FpPoly seed = detail::fp_powmod(x, p, g, p);
        std::vector<BigInt> r0(f, BigInt(0));
        for (size_t i = 0; i < seed.size(); ++i) r0[i] = seed[i];
        UnramElem r(ctx, std::move(r0));
        auto eval_poly = [&](const UnramElem& e, bool deriv) {
            // modulus(e) or modulus'(e); modulus is monic of degree f
            UnramElem acc = ctx->zero();
            if (!deriv) {
                acc = ctx->one();  // leading term coefficient
                for (int i = f - 1; i >= 0; --i) acc = acc * e + ctx->from_scalar(ctx->modulus[i]);
            } else {
                acc = ctx->from_scalar(f);
                for (int i = f - 1; i >= 1; --i) acc = acc * e + ctx->from_scalar(ctx->modulus[i] * i);
            }
            return acc;
        };
        int correct = 1;
        while (correct < N) {
            UnramElem fr = eval_poly(r, false);
            UnramElem dfr = eval_poly(r, true);
            r = r - fr * dfr.invert();
            correct *= 2;
        }
        // sanity: modulus(r) == 0 and r == x^p mod p
        if (!eval_poly(r, false).is_zero()) throw error("make_field: Frobenius Hensel lift failed");

        // power tables for sigma^t, t = 1..f-1
        for (int t = 1; t < f; ++t) ctx->frob_pow_table[t].assign(f, std::vector<BigInt>(f, BigInt(0)));
        UnramElem img = r;
        for (int t = 1; t < f; ++t) {
            UnramElem pw = ctx->one();
            for (int i = 0; i < f; ++i) {
                ctx->frob_pow_table[t][i] = pw.c;
                if (i + 1 < f) pw = pw * img;
            }
            if (t + 1 < f) {
                // sigma^{t+1}(x) = sigma^t applied to sigma(x): substitute using the t-table
                std::vector<BigInt> next(f, BigInt(0));
                for (int i = 0; i < f; ++i) {
                    if (r.c[i] == 0) continue;
                    for (int j = 0; j < f; ++j) next[j] += r.c[i] * ctx->frob_pow_table[t][i][j];
                }
                for (auto& xc : next) xc = mod_reduce(xc, ctx->pN);
                img = UnramElem(ctx, std::move(next));
            }
        }
    }
    return ctx;
}

inline FieldCtxPtr make_field(long long p, int a, int f, int N) { return FieldCtx::make(p, a, f, N); }

// Uniform random element / unit, driven by an external engine so corpora are
// reproducible from WACHLAB_SEED.
inline UnramElem random_elem(const FieldCtxPtr& ctx, std::mt19937_64& rng) {
    std::vector<BigInt> c(ctx->f);
    for (auto& x : c) {
        BigInt v = 0;
        BigInt bound = ctx->pN;
        while (bound > 0) {
            v = v * 1000000007ULL + (BigInt)(rng() % 1000000007ULL);
            bound /= 1000000007ULL;
        }
        x = mod_reduce(v, ctx->pN);
    }
    return UnramElem(ctx, std::move(c));
}

inline UnramElem random_unit(const FieldCtxPtr& ctx, std::mt19937_64& rng) {
    for (;;) {
        UnramElem e = random_elem(ctx, rng);
        if (e.is_unit()) return e;
    }
}

}  // namespace wachlab
