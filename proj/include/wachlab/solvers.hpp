#pragma once

// Scalar (phi,gamma)-equation solvers: lambda_b as a truncated product,
// g^{phi^b -+ 1} = h by coefficient-wise fixed points, h^{gamma-1} = f by
// division by chi(gamma)^n - 1 with denominator tracking.

#include "wachlab/series.hpp"

namespace wachlab {

namespace detail {

// p^{-e} * v with v over a (possibly boosted) context.
struct SElem {
    UnramElem v;
    int e = 0;

    SElem() = default;
    SElem(UnramElem val, int exp = 0) : v(std::move(val)), e(exp) {}

    SElem normalized() const {
        int t = std::min(e, v.valuation());
        if (t == 0) return *this;
        return SElem(v.div_pk(t), e - t);
    }
    SElem with_exp(int e2) const {
        if (e2 < e) throw input_error("SElem::with_exp: cannot lower exponent");
        return SElem(v.times_pk(e2 - e), e2);
    }
    friend SElem operator+(const SElem& a, const SElem& b) {
        int e = std::max(a.e, b.e);
        return SElem(a.with_exp(e).v + b.with_exp(e).v, e);
    }
    friend SElem operator-(const SElem& a, const SElem& b) {
        int e = std::max(a.e, b.e);
        return SElem(a.with_exp(e).v - b.with_exp(e).v, e);
    }
    friend SElem operator*(const SElem& a, const SElem& b) { return SElem(a.v * b.v, a.e + b.e); }
    bool is_zero() const { return v.is_zero(); }
};

inline int ceil_log_base(long long p, long long x) {
    int r = 0;
    long long t = 1;
    while (t < x) {
        t *= p;
        ++r;
    }
    return r;
}

}  // namespace detail

// ceil((M-1)/(p-1)): the R_{p-1} denominator budget at pi-precision M.
inline int lambda_denom_budget(const FieldCtxPtr& ctx, int M) {
    return (int)((M - 1 + ctx->p - 2) / (ctx->p - 1));
}

// lambda_b = prod_{n>=0} phi^{bn}(q)/p, truncated at (p^N, pi^M).  Factors
// with bn beyond the cutoff are congruent to 1 at the target precision.
// Computed at an internally boosted p-precision so the returned body is
// exact mod p^N.
inline ScaledSeries lambda_b(int b, const FieldCtxPtr& ctx, int M) {
    if (b < 1) throw input_error("lambda_b: b >= 1 required");
    const int N = ctx->N;
    const int emax = lambda_denom_budget(ctx, M);
    const int logM = detail::ceil_log_base(ctx->p, std::max(M, 2));
    const int cutoff = N + emax + logM + 1;  // include factors with bn <= cutoff
    const int count = cutoff / b + 1;
    const int Nint = N + emax + count + 2;

    auto bctx = ctx->with_precision(Nint);
    TruncSeries body = TruncSeries::one(bctx, M);
    int denom = 0;
    for (int n = 0; b * n <= cutoff; ++n) {
        TruncSeries factor = phi(q_elem(bctx, M), b * n);
        body = body * factor;
        denom += 1;
    }
    ScaledSeries lam(body, denom);
    lam = lam.normalized();
    return lam.reduced_to(ctx);
}

// Solve g^{phi^b - 1} = h for integral h in 1 + pi O_E[[pi]]; the result is
// integral (Lemma-type integrality transfer).  Verified by substitution.
inline TruncSeries solve_phi_eq_integral(const TruncSeries& h, int b) {
    const auto& ctx = h.ctx;
    const int M = h.M, N = ctx->N;
    if (!(h.a[0] == ctx->one())) throw input_error("solve_phi_eq: constant term must be 1");
    // powers of phi^b(pi)
    std::vector<TruncSeries> pw;
    pw.reserve(M);
    pw.push_back(TruncSeries::one(ctx, M));
    TruncSeries fp = phi_pi(ctx, M, b);
    for (int t = 1; t < M; ++t) pw.push_back(pw.back() * fp);

    TruncSeries g = TruncSeries::one(ctx, M);
    for (int n = 1; n < M; ++n) {
        // sigma^b(g_n) p^{nb} + W_n = g_n with
        // W_n = sum_{t<n} sigma^b(g_t) pw[t][n] - sum_{s>=1} h_s g_{n-s}
        UnramElem W = ctx->zero();
        for (int t = 0; t < n; ++t)
            if (!g.a[t].is_zero() && !pw[t].a[n].is_zero()) W += g.a[t].frobenius(b) * pw[t].a[n];
        for (int s = 1; s <= n; ++s)
            if (!h.a[s].is_zero() && !g.a[n - s].is_zero()) W -= h.a[s] * g.a[n - s];
        int rounds = N / (n * b) + 2;
        UnramElem x = W;
        for (int r = 0; r < rounds; ++r) x = x.frobenius(b).times_pk(n * b) + W;
        g.a[n] = x;
    }
    return g;
}

// Scaled variant: h may carry denominators (e.g. q/p); solves at the given
// context precision, per-coefficient denominators tracked.
inline ScaledSeries solve_phi_eq_scaled(const ScaledSeries& h, int b) {
    const auto& ctx = h.body.ctx;
    const int M = h.body.M, N = ctx->N;
    ScaledSeries hn = h.normalized();
    if (!(hn.denom_exp == 0 ? hn.body.a[0] == ctx->one()
                            : hn.body.a[0] == ctx->one().times_pk(hn.denom_exp)))
        throw input_error("solve_phi_eq: constant term must be 1");
    std::vector<TruncSeries> pw;
    pw.push_back(TruncSeries::one(ctx, M));
    TruncSeries fp = phi_pi(ctx, M, b);
    for (int t = 1; t < M; ++t) pw.push_back(pw.back() * fp);

    std::vector<detail::SElem> g(M, detail::SElem(ctx->zero(), 0));
    g[0] = detail::SElem(ctx->one(), 0);
    for (int n = 1; n < M; ++n) {
        detail::SElem W(ctx->zero(), 0);
        for (int t = 0; t < n; ++t)
            if (!g[t].is_zero() && !pw[t].a[n].is_zero())
                W = W + detail::SElem(g[t].v.frobenius(b) * pw[t].a[n], g[t].e);
        for (int s = 1; s <= n; ++s) {
            detail::SElem hs(hn.body.a[s], hn.denom_exp);
            if (!hs.is_zero() && !g[n - s].is_zero()) W = W - hs * g[n - s];
        }
        W = W.normalized();
        int rounds = (N + W.e) / (n * b) + 2;
        detail::SElem x = W;
        for (int r = 0; r < rounds; ++r)
            x = detail::SElem(x.v.frobenius(b).times_pk(n * b), x.e) + W;
        g[n] = x.normalized();
    }
    int e = 0;
    for (const auto& s : g) e = std::max(e, s.e);
    TruncSeries body(ctx, M);
    for (int n = 0; n < M; ++n) body.a[n] = g[n].with_exp(e).v;
    return ScaledSeries(body, e).normalized();
}

enum class PhiSign { minus, plus };

// g^{phi^b -+ 1} = h.  sign == plus solves via g^{phi^{2b}-1} = h^{phi^b-1}.
inline TruncSeries solve_phi_eq(const TruncSeries& h, int b, PhiSign sign = PhiSign::minus) {
    if (sign == PhiSign::minus) return solve_phi_eq_integral(h, b);
    TruncSeries hb = phi(h, b) * h.invert_unit();
    return solve_phi_eq_integral(hb, 2 * b);
}

struct GammaSolveResult {
    ScaledSeries h;
    int achieved_N;    // coefficients of the value are certified mod p^{achieved_N}
    int max_denom;     // largest per-coefficient denominator exponent
};

// Solve h^{gamma-1} = f for f in 1 + pi O_E[[pi]].  Division by
// chi(gamma)^n - 1 loses ord_p(chi^n - 1) digits per degree; the achieved
// precision is reported rather than silently degraded.
inline GammaSolveResult solve_gamma_eq(const TruncSeries& f, const GammaChar& g) {
    const auto& ctx = f.ctx;
    const int M = f.M, N = ctx->N;
    if (!(f.a[0] == ctx->one())) throw input_error("solve_gamma_eq: constant term must be 1");

    // powers of gamma(pi)
    std::vector<TruncSeries> gp;
    gp.push_back(TruncSeries::one(ctx, M));
    TruncSeries gpi = gamma_pi(ctx, M, g);
    for (int t = 1; t < M; ++t) gp.push_back(gp.back() * gpi);

    std::vector<detail::SElem> h(M, detail::SElem(ctx->zero(), 0));
    std::vector<int> known(M, 0);
    h[0] = detail::SElem(ctx->one(), 0);
    known[0] = N;
    int max_denom = 0;
    for (int n = 1; n < M; ++n) {
        // (c^n - 1) h_n = sum_{s>=1} f_s h_{n-s} - sum_{t<n} h_t gp[t][n]
        detail::SElem W(ctx->zero(), 0);
        int kmin = N;
        for (int s = 1; s <= n; ++s)
            if (!f.a[s].is_zero() && !h[n - s].is_zero()) {
                W = W + detail::SElem(f.a[s] * h[n - s].v, h[n - s].e);
                kmin = std::min(kmin, known[n - s]);
            }
        for (int t = 0; t < n; ++t)
            if (!h[t].is_zero() && !gp[t].a[n].is_zero()) {
                W = W - detail::SElem(h[t].v * gp[t].a[n], h[t].e);
                kmin = std::min(kmin, known[t]);
            }
        BigInt cn = mod_reduce(pow_big(g.c, n) - 1, ctx->pN);
        int vn = ord_p_residue(cn, ctx->p, N);
        if (vn >= N) throw precision_error("solve_gamma_eq: chi(gamma)^n = 1 at working precision");
        if (W.is_zero()) {
            h[n] = detail::SElem(ctx->zero(), 0);
            known[n] = kmin;  // 0 / (c^n - 1) is exact
            continue;
        }
        UnramElem unit = ctx->from_scalar(cn).div_pk(vn);
        detail::SElem x(W.v * unit.invert(), W.e + vn);
        h[n] = x.normalized();
        known[n] = kmin - vn;
        max_denom = std::max(max_denom, h[n].e);
    }
    int achieved = N;
    for (int n = 1; n < M; ++n) achieved = std::min(achieved, known[n]);
    int e = 0;
    for (const auto& s : h) e = std::max(e, s.e);
    TruncSeries body(ctx, M);
    for (int n = 0; n < M; ++n) body.a[n] = h[n].with_exp(e).v;
    return GammaSolveResult{ScaledSeries(body, e).normalized(), achieved, max_denom};
}

// q^{gamma-1} computed at boosted internal precision (the naive division by
// a constant-term-p series amplifies truncation error) and returned exact
// at the nominal one.
inline TruncSeries q_gamma_ratio(const FieldCtxPtr& ctx, int M, const GammaChar& g) {
    int Nint = ctx->N + M + 2;
    if (!g.exact_value && Nint > g.cap) Nint = g.cap;
    auto bctx = ctx->with_precision(Nint);
    TruncSeries q = q_elem(bctx, M);
    TruncSeries gq = gamma_act(q, g);
    TruncSeries r = exact_divide(gq, q);
    // verify at the boosted precision's reliable range
    TruncSeries back = r * q - gq;
    if (back.ord_p() < ctx->N) throw math_error("q_gamma_ratio: division verification failed");
    return r.reduced_to(ctx);
}

// lambda_b^{1-gamma} = prod phi^{bn}(q/gamma(q)): integral, in 1+pi Z_p[[pi]].
inline TruncSeries lambda_one_minus_gamma(int b, const FieldCtxPtr& ctx, int M, const GammaChar& g) {
    const int N = ctx->N;
    const int logM = detail::ceil_log_base(ctx->p, std::max(M, 2));
    const int cutoff = N + logM + 1;
    int Nint = N + M + logM + 4;
    if (!g.exact_value && Nint > g.cap) Nint = g.cap;
    auto bctx = ctx->with_precision(Nint);
    TruncSeries w = q_gamma_ratio(bctx, M, g).invert_unit();  // q/gamma(q)
    TruncSeries acc = TruncSeries::one(bctx, M);
    for (int n = 0; b * n <= cutoff; ++n) acc = acc * phi(w, b * n);
    return acc.reduced_to(ctx);
}

}  // namespace wachlab
