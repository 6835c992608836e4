#pragma once

// Arithmetic in O_E[[pi]] truncated at pi^M: the phi- and gamma-operators,
// the elements q and lambda_b, and growth-ring membership.  phi applies
// sigma to coefficients and substitutes pi -> (1+pi)^p - 1; gamma fixes
// coefficients and substitutes pi -> (1+pi)^{chi(gamma)} - 1.

#include "wachlab/field.hpp"

#include <algorithm>
#include <functional>
#include <optional>

namespace wachlab {

class TruncSeries {
  public:
    FieldCtxPtr ctx;
    int M = 0;
    std::vector<UnramElem> a;  // a[s] = coefficient of pi^s, length M

    TruncSeries() = default;
    TruncSeries(FieldCtxPtr c, int M_) : ctx(std::move(c)), M(M_), a(M_, ctx ? ctx->zero() : UnramElem{}) {
        if (M < 1) throw input_error("TruncSeries: M >= 1 required");
        for (auto& x : a) x = ctx->zero();
    }
    TruncSeries(FieldCtxPtr c, int M_, std::vector<UnramElem> coeffs) : ctx(std::move(c)), M(M_), a(std::move(coeffs)) {
        if ((int)a.size() != M) throw input_error("TruncSeries: coefficient count != M");
    }

    static TruncSeries zero(const FieldCtxPtr& c, int M) { return TruncSeries(c, M); }
    static TruncSeries one(const FieldCtxPtr& c, int M) {
        TruncSeries s(c, M);
        s.a[0] = c->one();
        return s;
    }
    static TruncSeries pi(const FieldCtxPtr& c, int M) {
        TruncSeries s(c, M);
        if (M > 1) s.a[1] = c->one();
        return s;
    }
    static TruncSeries constant(const UnramElem& e, int M) {
        TruncSeries s(e.ctx, M);
        s.a[0] = e;
        return s;
    }

    TruncSeries zero_like() const { return TruncSeries(ctx, M); }
    TruncSeries one_like() const { return one(ctx, M); }

    const UnramElem& coeff(int s) const { return a.at(s); }
    UnramElem eval0() const { return a[0]; }

    bool is_zero() const {
        for (const auto& x : a)
            if (!x.is_zero()) return false;
        return true;
    }
    bool is_unit() const { return a[0].is_unit(); }

    // min_s ord_p(a_s); N when identically zero mod p^N
    int ord_p() const {
        int v = ctx->N;
        for (const auto& x : a) v = std::min(v, x.valuation());
        return v;
    }
    // lowest s with a_s != 0 mod p^N; M when zero
    int pi_order() const {
        for (int s = 0; s < M; ++s)
            if (!a[s].is_zero()) return s;
        return M;
    }

    void check(const TruncSeries& b) const {
        if (M != b.M) throw input_error("TruncSeries: pi-precision mismatch");
        a[0].check_ctx(b.a[0]);
    }

    friend TruncSeries operator+(const TruncSeries& x, const TruncSeries& y) {
        x.check(y);
        TruncSeries r(x.ctx, x.M);
        for (int s = 0; s < x.M; ++s) r.a[s] = x.a[s] + y.a[s];
        return r;
    }
    friend TruncSeries operator-(const TruncSeries& x, const TruncSeries& y) {
        x.check(y);
        TruncSeries r(x.ctx, x.M);
        for (int s = 0; s < x.M; ++s) r.a[s] = x.a[s] - y.a[s];
        return r;
    }
    friend TruncSeries operator-(const TruncSeries& x) {
        TruncSeries r(x.ctx, x.M);
        for (int s = 0; s < x.M; ++s) r.a[s] = -x.a[s];
        return r;
    }
    friend TruncSeries operator*(const TruncSeries& x, const TruncSeries& y) {
        x.check(y);
        TruncSeries r(x.ctx, x.M);
        for (int s = 0; s < x.M; ++s) {
            if (x.a[s].is_zero()) continue;
            for (int t = 0; s + t < x.M; ++t) {
                if (y.a[t].is_zero()) continue;
                r.a[s + t] += x.a[s] * y.a[t];
            }
        }
        return r;
    }
    friend TruncSeries operator*(const TruncSeries& x, const UnramElem& e) {
        TruncSeries r(x.ctx, x.M);
        for (int s = 0; s < x.M; ++s) r.a[s] = x.a[s] * e;
        return r;
    }
    TruncSeries& operator+=(const TruncSeries& y) { return *this = *this + y; }
    TruncSeries& operator-=(const TruncSeries& y) { return *this = *this - y; }
    TruncSeries& operator*=(const TruncSeries& y) { return *this = *this * y; }

    friend bool operator==(const TruncSeries& x, const TruncSeries& y) {
        x.check(y);
        return x.a == y.a;
    }
    friend bool operator!=(const TruncSeries& x, const TruncSeries& y) { return !(x == y); }

    // multiply by pi^k (shift up, truncating)
    TruncSeries shift_up(int k) const {
        TruncSeries r(ctx, M);
        for (int s = 0; s + k < M; ++s) r.a[s + k] = a[s];
        return r;
    }
    // exact division by pi^k; lower coefficients must vanish mod p^N
    TruncSeries shift_down(int k) const {
        for (int s = 0; s < std::min(k, M); ++s)
            if (!a[s].is_zero()) throw math_error("shift_down: series not divisible by pi^k");
        TruncSeries r(ctx, M);
        for (int s = k; s < M; ++s) r.a[s - k] = a[s];
        return r;
    }

    TruncSeries truncated_to(int Mp) const {
        if (Mp > M) throw input_error("truncated_to: cannot extend pi-precision");
        TruncSeries r(ctx, Mp);
        for (int s = 0; s < Mp; ++s) r.a[s] = a[s];
        return r;
    }
    // widen pi-precision; valid only when the tail is genuinely known to be zero
    // (polynomials such as q and gamma(pi))
    TruncSeries widened_to(int Mp) const {
        if (Mp < M) return truncated_to(Mp);
        TruncSeries r(ctx, Mp);
        for (int s = 0; s < M; ++s) r.a[s] = a[s];
        return r;
    }

    TruncSeries map_coeffs(const std::function<UnramElem(const UnramElem&)>& fn) const {
        TruncSeries r(ctx, M);
        for (int s = 0; s < M; ++s) r.a[s] = fn(a[s]);
        return r;
    }

    TruncSeries frobenius(long long t) const {
        return map_coeffs([&](const UnramElem& e) { return e.frobenius(t); });
    }

    TruncSeries div_pk(int k) const {
        return map_coeffs([&](const UnramElem& e) { return e.div_pk(k); });
    }
    TruncSeries times_pk(int k) const {
        return map_coeffs([&](const UnramElem& e) { return e.times_pk(k); });
    }

    TruncSeries reduced_to(const FieldCtxPtr& c2) const {
        TruncSeries r(c2, M);
        for (int s = 0; s < M; ++s) r.a[s] = a[s].reduced_to(c2);
        return r;
    }

    // Substitute pi -> sub (sub must have zero constant term); coefficients
    // pass through fn (sigma powers for phi, identity for gamma).
    TruncSeries substituted(const TruncSeries& sub, long long frob_t) const {
        if (!sub.a[0].is_zero()) throw input_error("substituted: substitution needs zero constant term");
        TruncSeries r(ctx, M);
        for (int s = M - 1; s >= 0; --s) {
            r = r * sub;
            r.a[0] += a[s].frobenius(frob_t);
        }
        return r;
    }

    // Inverse of a series with unit constant term.
    TruncSeries invert_unit() const {
        if (!is_unit()) throw math_error("invert_unit: constant term is not a unit");
        UnramElem c0inv = a[0].invert();
        TruncSeries r(ctx, M);
        r.a[0] = c0inv;
        for (int n = 1; n < M; ++n) {
            UnramElem acc = ctx->zero();
            for (int i = 1; i <= n; ++i) acc += a[i] * r.a[n - i];
            r.a[n] = -(c0inv * acc);
        }
        return r;
    }
};

// (1 + pi)^e mod (p^N, pi^M); negative exponents via the unit inverse.
inline TruncSeries one_plus_pi_pow(const FieldCtxPtr& ctx, int M, BigInt e) {
    bool neg = e < 0;
    if (neg) e = -e;
    TruncSeries base = TruncSeries::one(ctx, M) + TruncSeries::pi(ctx, M);
    TruncSeries r = TruncSeries::one(ctx, M);
    while (e > 0) {
        if ((e & 1) != 0) r = r * base;
        base = base * base;
        e >>= 1;
    }
    return neg ? r.invert_unit() : r;
}

// phi^t(pi) = (1+pi)^{p^t} - 1
inline TruncSeries phi_pi(const FieldCtxPtr& ctx, int M, int t = 1) {
    return one_plus_pi_pow(ctx, M, pow_big(ctx->p, t)) - TruncSeries::one(ctx, M);
}

// phi^t: sigma^t on coefficients, then pi -> (1+pi)^{p^t} - 1
inline TruncSeries phi(const TruncSeries& f, int t = 1) {
    if (t == 0) return f;
    return f.substituted(phi_pi(f.ctx, f.M, t), t);
}

// q = phi(pi)/pi = pi^{p-1} + ... + p  (an exact integer polynomial)
inline TruncSeries q_elem(const FieldCtxPtr& ctx, int M) {
    TruncSeries q(ctx, M);
    // coefficient of pi^{i-1} is binom(p, i); Pascal row p
    long long p = ctx->p;
    std::vector<BigInt> row(p + 1, BigInt(0));
    row[0] = 1;
    for (long long r = 1; r <= p; ++r)
        for (long long k = r; k >= 1; --k) row[k] += row[k - 1];
    for (long long i = 1; i <= p && i - 1 < M; ++i) q.a[i - 1] = ctx->from_scalar(row[i]);
    return q;
}

// The value chi(gamma).  Either an exact integer (so substitutions and
// character products are exact at any working precision) or the default
// generator's value teich(g0)(1+p), stored as a residue at its own cap.
struct GammaChar {
    long long p = 0;
    BigInt c;                  // exact integer, or residue in [0, p^cap)
    int cap = 0;               // meaningful when !exact_value
    bool exact_value = false;  // c is an exact element of Z (hence of Z_p)
    bool is_generator = false;

    // ord_p(c^n - 1); for the default generator this is exact by formula:
    // 0 unless (p-1) | n, else 1 + ord_p(n).
    int ord_cn_minus_1(long long n) const {
        if (is_generator) {
            if (n % (p - 1) != 0) return 0;
            long long nn = n;
            int v = 1;
            while (nn % p == 0) {
                nn /= p;
                ++v;
            }
            return v;
        }
        if (exact_value) {
            BigInt x = pow_big(c, n) - 1;
            if (x == 0) throw math_error("GammaChar: chi(gamma) has finite order");
            int v = 0;
            while (x % p == 0) {
                x /= p;
                ++v;
            }
            return v;
        }
        BigInt pc = pow_big(p, cap);
        BigInt x = mod_reduce(pow_big(mod_reduce(c, pc), n), pc);
        x = mod_reduce(x - 1, pc);
        int v = ord_p_residue(x, p, cap);
        if (v >= cap) throw precision_error("GammaChar: ord_p(c^n - 1) exceeds stored precision");
        return v;
    }
};

// Character values are stored with enough extra digits to serve the
// internally boosted solver precisions (q-division boosts up to N + M).
inline int gamma_cap_for(const FieldCtxPtr& ctx, int M) {
    int logM = 0;
    long long t = 1;
    while (t < std::max(M, 2)) {
        t *= ctx->p;
        ++logM;
    }
    return ctx->N + 2 * M + logM + 16;
}

// Teichmueller lift of x0 mod p^cap: iterate x -> x^p until stable.
inline BigInt teichmuller(long long p, long long x0, int cap) {
    BigInt m = pow_big(p, cap);
    BigInt x = x0 % m;
    for (int i = 0; i < cap + 2; ++i) {
        BigInt y = 1, b = x;
        long long e = p;
        while (e > 0) {
            if (e & 1) y = y * b % m;
            b = b * b % m;
            e >>= 1;
        }
        if (y == x) break;
        x = y;
    }
    return x;
}

inline long long smallest_primitive_root(long long p) {
    auto is_primitive = [&](long long g) {
        // order of g mod p is p-1
        long long n = p - 1;
        std::vector<long long> primes;
        long long m = n;
        for (long long r = 2; r * r <= m; ++r)
            if (m % r == 0) {
                primes.push_back(r);
                while (m % r == 0) m /= r;
            }
        if (m > 1) primes.push_back(m);
        for (long long r : primes) {
            // g^{n/r} mod p
            long long e = n / r;
            long long y = 1, b = g % p;
            while (e > 0) {
                if (e & 1) y = (__int128)y * b % p;
                b = (__int128)b * b % p;
                e >>= 1;
            }
            if (y == 1) return false;
        }
        return true;
    };
    for (long long g = 2; g < p; ++g)
        if (is_primitive(g)) return g;
    throw error("no primitive root");
}

// Default generator of Gamma_K: chi(gamma) = teich(g0) * (1+p) with g0 the
// smallest primitive root mod p.
inline GammaChar default_generator(const FieldCtxPtr& ctx, int M) {
    GammaChar g;
    g.p = ctx->p;
    g.cap = gamma_cap_for(ctx, M);
    BigInt m = pow_big(ctx->p, g.cap);
    BigInt w = teichmuller(ctx->p, smallest_primitive_root(ctx->p), g.cap);
    g.c = mod_reduce(w * (1 + ctx->p), m);
    g.is_generator = true;
    return g;
}

// An exact integer character value (e.g. 4 or -4 in the worked examples).
inline GammaChar gamma_char_from_value(const FieldCtxPtr& ctx, const BigInt& c) {
    GammaChar g;
    g.p = ctx->p;
    g.c = c;
    if (mod_reduce(c, ctx->p) == 0) throw input_error("gamma char value must be a unit");
    g.exact_value = true;
    g.is_generator = false;
    return g;
}

inline GammaChar gamma_square(const GammaChar& g) {
    GammaChar h = g;
    h.c = g.exact_value ? g.c * g.c : mod_reduce(g.c * g.c, pow_big(g.p, g.cap));
    h.is_generator = false;
    return h;
}

// gamma(pi) = (1+pi)^{chi(gamma)} - 1
inline TruncSeries gamma_pi(const FieldCtxPtr& ctx, int M, const GammaChar& g) {
    return one_plus_pi_pow(ctx, M, g.c) - TruncSeries::one(ctx, M);
}

// gamma action: coefficients unchanged, pi -> gamma(pi)
inline TruncSeries gamma_act(const TruncSeries& f, const GammaChar& g) {
    return f.substituted(gamma_pi(f.ctx, f.M, g), 0);
}

// Exact series division F = Q * G (checked); the constant term of G must be
// p^v * unit, and every interior division must be exact.  When v > 0 the
// top v p-adic digits of Q are not guaranteed; callers divide at boosted
// precision and verify residuals at the nominal one.
inline TruncSeries exact_divide(const TruncSeries& F, const TruncSeries& G) {
    F.check(G);
    const auto& ctx = F.ctx;
    int v0 = G.a[0].valuation();
    if (v0 >= ctx->N) throw math_error("exact_divide: divisor constant term vanishes at precision");
    UnramElem u = G.a[0].div_pk(v0);
    UnramElem uinv = u.invert();
    TruncSeries Q(ctx, F.M);
    for (int n = 0; n < F.M; ++n) {
        UnramElem acc = F.a[n];
        for (int i = 1; i <= n; ++i) acc -= G.a[i] * Q.a[n - i];
        // divide by G_0 = p^{v0} u
        acc = acc * uinv;
        Q.a[n] = acc.div_pk(v0);
    }
    return Q;
}

// q^{gamma-1} = gamma(q)/q, an element of 1 + pi Z_p[[pi]].
inline TruncSeries q_gamma_minus_1(const FieldCtxPtr& ctx, int M, const GammaChar& g) {
    TruncSeries q = q_elem(ctx, M);
    TruncSeries gq = gamma_act(q, g);
    TruncSeries r = exact_divide(gq, q);
    return r;
}

// --------------------------------------------------------------------------
// ScaledSeries: p^{-denom_exp} * body, body integral.

class ScaledSeries {
  public:
    int denom_exp = 0;
    TruncSeries body;

    ScaledSeries() = default;
    explicit ScaledSeries(TruncSeries b, int e = 0) : denom_exp(e), body(std::move(b)) {
        if (e < 0) throw input_error("ScaledSeries: negative denominator exponent");
    }

    static ScaledSeries from_trunc(const TruncSeries& t) { return ScaledSeries(t, 0); }

    // strip common p-powers so denom_exp = 0 or some coefficient is a unit
    ScaledSeries normalized() const {
        int v = body.ord_p();
        int t = std::min(v, denom_exp);
        if (t == 0) return *this;
        return ScaledSeries(body.div_pk(t), denom_exp - t);
    }

    bool is_integral() const { return normalized().denom_exp == 0; }

    TruncSeries to_trunc() const {
        ScaledSeries n = normalized();
        if (n.denom_exp != 0) throw math_error("ScaledSeries: not integral");
        return n.body;
    }

    ScaledSeries with_denom(int e) const {
        if (e < denom_exp) throw input_error("with_denom: cannot lower denominator exactly");
        return ScaledSeries(body.times_pk(e - denom_exp), e);
    }

    friend ScaledSeries operator*(const ScaledSeries& x, const ScaledSeries& y) {
        return ScaledSeries(x.body * y.body, x.denom_exp + y.denom_exp);
    }
    friend ScaledSeries operator+(const ScaledSeries& x, const ScaledSeries& y) {
        int e = std::max(x.denom_exp, y.denom_exp);
        return ScaledSeries(x.with_denom(e).body + y.with_denom(e).body, e);
    }
    friend ScaledSeries operator-(const ScaledSeries& x, const ScaledSeries& y) {
        int e = std::max(x.denom_exp, y.denom_exp);
        return ScaledSeries(x.with_denom(e).body - y.with_denom(e).body, e);
    }

    ScaledSeries reduced_to(const FieldCtxPtr& c2) const {
        ScaledSeries n = normalized();
        return ScaledSeries(n.body.reduced_to(c2), n.denom_exp);
    }

    // Geometric inverse for constant term 1 (works in any R_c ring):
    // x^{-1} = sum (1-x)^i, the sum truncating because 1-x has pi-order >= 1.
    ScaledSeries invert_const1() const {
        TruncSeries one = TruncSeries::one(body.ctx, body.M);
        ScaledSeries d = ScaledSeries(one.times_pk(denom_exp) - body, denom_exp).normalized();  // 1 - x
        if (!(d.body.pi_order() >= 1 || d.body.is_zero())) throw math_error("invert_const1: constant term != 1");
        ScaledSeries acc = ScaledSeries::from_trunc(one);
        ScaledSeries pw = ScaledSeries::from_trunc(one);
        for (int i = 1; i < body.M; ++i) {
            pw = (pw * d).normalized();
            acc = (acc + pw).normalized();
        }
        return acc;
    }

    ScaledSeries pow_int(long long e) const {
        if (e < 0) return invert_const1().pow_int(-e);
        ScaledSeries r = ScaledSeries::from_trunc(TruncSeries::one(body.ctx, body.M));
        ScaledSeries b = *this;
        while (e > 0) {
            if (e & 1) r = (r * b).normalized();
            b = (b * b).normalized();
            e >>= 1;
        }
        return r;
    }
};

// ord_p a_s >= -s/c for every s, at the stored precision.
inline bool r_c_check(const ScaledSeries& f, const Rat& cgrowth) {
    if (cgrowth.num == 0) throw input_error("r_c_check: growth constant must be nonzero");
    ScaledSeries n = f.normalized();
    for (int s = 0; s < n.body.M; ++s) {
        int v = n.body.a[s].valuation();  // ord >= v - e, and exactly v - e when v < N
        long long ord_num = (long long)(v - n.denom_exp);
        // need ord >= -s/c  <=>  ord * c_num >= -s * c_den  (c > 0)
        if (cgrowth.num < 0) throw input_error("r_c_check: negative growth constant");
        if (ord_num * cgrowth.num < -(long long)s * cgrowth.den) return false;
    }
    return true;
}

}  // namespace wachlab
