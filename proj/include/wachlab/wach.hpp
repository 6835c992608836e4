#pragma once

// Embedded integral Wach modules: solving the commutation system
// G_{gamma,j-1} gamma(P_j) = P_j phi(G_{gamma,j}) degree by degree, lifting
// strongly divisible phi-lattices (A_j) to (P_j = A_j Delta_j(q), G_j), the
// commutant equation G M^gamma = M G, and continuity transport of lifts
// along p-adically close inputs.
//
// All solving happens at an internally boosted p-precision; the results are
// verified at the nominal precision by division-free residual checks, with
// escalation of the boost on failure.

#include "wachlab/irred2.hpp"
#include "wachlab/solvers.hpp"

#include <map>

namespace wachlab {

using SeriesMat = Mat<TruncSeries>;

namespace wdetail {

inline SeriesMat const_to_series(const Mat<UnramElem>& m, int M) {
    return m.map([&](const UnramElem& e) { return TruncSeries::constant(e, M); });
}

inline Mat<UnramElem> coeff_of(const SeriesMat& m, int n) {
    return m.map([&](const TruncSeries& s) { return s.coeff(n); });
}

inline SeriesMat substituted(const SeriesMat& m, const TruncSeries& sub, long long frob_t) {
    return m.map([&](const TruncSeries& s) { return s.substituted(sub, frob_t); });
}

inline int min_pi_order(const SeriesMat& m) {
    int v = m.data[0].M;
    for (const auto& s : m.data) v = std::min(v, s.pi_order());
    return v;
}

inline int min_ord_p(const SeriesMat& m) {
    int v = m.data[0].ctx->N;
    for (const auto& s : m.data) v = std::min(v, s.ord_p());
    return v;
}

inline SeriesMat reduced_to(const SeriesMat& m, const FieldCtxPtr& ctx) {
    return m.map([&](const TruncSeries& s) { return s.reduced_to(ctx); });
}

// add pi^n * B (B constant) to a series matrix
inline void add_shifted(SeriesMat& m, const Mat<UnramElem>& B, int n) {
    for (int i = 0; i < m.rows; ++i)
        for (int j = 0; j < m.cols; ++j) m.at(i, j).a[n] += B.at(i, j);
}

// m * (c * pw) where c is a constant matrix and pw a scalar series
inline SeriesMat mul_const_scaled(const SeriesMat& m, const Mat<UnramElem>& c, const TruncSeries& pw) {
    SeriesMat cm = const_to_series(c, pw.M);
    SeriesMat r = m * cm;
    return r.map([&](const TruncSeries& s) { return s * pw; });
}

// Exact entrywise division of a constant matrix by p^k.
inline Mat<UnramElem> div_pk_mat(const Mat<UnramElem>& m, int k, const char* what) {
    try {
        return m.map([&](const UnramElem& e) { return e.div_pk(k); });
    } catch (const math_error&) {
        throw math_error(std::string("exact p-power division failed in ") + what);
    }
}

// sigma^t entrywise on a constant matrix
inline Mat<UnramElem> frob_mat(const Mat<UnramElem>& m, long long t) {
    return m.map([&](const UnramElem& e) { return e.frobenius(t); });
}

// Solve the Z/p^N-linear system L(B) = B - s0 sigma^a(B) W = rhs on
// d x d matrices over O_E (fd^2 unknowns).  Throws when singular mod p.
inline Mat<UnramElem> solve_boundary_linear(const Mat<UnramElem>& s0, const Mat<UnramElem>& W, int a,
                                            const Mat<UnramElem>& rhs) {
    const auto& ctx = s0.data[0].ctx;
    const int d = s0.rows, f = ctx->f;
    const int dim = f * d * d;
    // columns: basis elements x^c in entry (r,s)
    std::vector<std::vector<BigInt>> Mcols(dim, std::vector<BigInt>(dim));
    auto flatten = [&](const Mat<UnramElem>& m, std::vector<BigInt>& out) {
        out.resize(dim);
        int idx = 0;
        for (int r = 0; r < d; ++r)
            for (int s = 0; s < d; ++s)
                for (int c = 0; c < f; ++c) out[idx++] = m.at(r, s).c[c];
    };
    int col = 0;
    for (int r = 0; r < d; ++r)
        for (int s = 0; s < d; ++s)
            for (int c = 0; c < f; ++c) {
                Mat<UnramElem> B = Mat<UnramElem>::zero(d, d, ctx->zero());
                std::vector<BigInt> coeffs(f, BigInt(0));
                coeffs[c] = 1;
                B.at(r, s) = ctx->from_coeffs(coeffs);
                Mat<UnramElem> L = B - s0 * frob_mat(B, a) * W;
                flatten(L, Mcols[col]);
                ++col;
            }
    std::vector<BigInt> b;
    flatten(rhs, b);
    // Gaussian elimination over Z/p^N with unit pivots
    const BigInt& pN = ctx->pN;
    const long long p = ctx->p;
    std::vector<std::vector<BigInt>> Amat(dim, std::vector<BigInt>(dim));
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) Amat[i][j] = Mcols[j][i];
    std::vector<int> where(dim, -1);
    for (int colj = 0, row = 0; colj < dim && row < dim; ++colj) {
        int piv = -1;
        for (int i = row; i < dim; ++i)
            if (Amat[i][colj] % p != 0) {
                piv = i;
                break;
            }
        if (piv < 0) throw math_error("solve_G: boundary linear system singular mod p (k_{j,d-1} = 0?)");
        std::swap(Amat[piv], Amat[row]);
        std::swap(b[piv], b[row]);
        // normalize pivot to 1 (extended-gcd inverse mod p^N; pivot is a unit)
        BigInt inv = 1, base = Amat[row][colj] % pN;
        {
            BigInt a0 = base, b0 = pN, x0 = 1, x1 = 0;
            while (b0 != 0) {
                BigInt qq = a0 / b0;
                BigInt t = a0 - qq * b0;
                a0 = b0;
                b0 = t;
                t = x0 - qq * x1;
                x0 = x1;
                x1 = t;
            }
            inv = mod_reduce(x0, pN);
        }
        for (int j2 = colj; j2 < dim; ++j2) Amat[row][j2] = mod_reduce(Amat[row][j2] * inv, pN);
        b[row] = mod_reduce(b[row] * inv, pN);
        for (int i = 0; i < dim; ++i) {
            if (i == row) continue;
            BigInt fctr = Amat[i][colj];
            if (fctr == 0) continue;
            for (int j2 = colj; j2 < dim; ++j2) Amat[i][j2] = mod_reduce(Amat[i][j2] - fctr * Amat[row][j2], pN);
            b[i] = mod_reduce(b[i] - fctr * b[row], pN);
        }
        where[colj] = row;
        ++row;
    }
    Mat<UnramElem> X = Mat<UnramElem>::zero(d, d, ctx->zero());
    int idx = 0;
    for (int r = 0; r < d; ++r)
        for (int s = 0; s < d; ++s) {
            std::vector<BigInt> coeffs(f, BigInt(0));
            for (int c = 0; c < f; ++c) {
                coeffs[c] = b[where[idx]];
                ++idx;
            }
            X.at(r, s) = ctx->from_coeffs(coeffs);
        }
    return X;
}

}  // namespace wdetail

// beta_{gamma,n} = prod_{i<=n} (chi(gamma)^i - 1): the denominator budget of
// the gamma-equation solvers.
struct BetaTable {
    std::vector<int> ord;  // ord[n] = ord_p beta_{gamma,n}, n = 0..M-1

    static BetaTable make(const GammaChar& g, int M) {
        BetaTable t;
        t.ord.resize(M, 0);
        int acc = 0;
        for (int n = 1; n < M; ++n) {
            acc += g.ord_cn_minus_1(n);
            t.ord[n] = acc;
        }
        return t;
    }
    // floor(n p / (p-1)^2) bound for the default generator
    bool within_generator_bound(long long p) const {
        for (size_t n = 0; n < ord.size(); ++n)
            if (ord[n] > (long long)n * p / ((p - 1) * (p - 1))) return false;
        return true;
    }
};

struct SolveGOptions {
    int start_degree;  // hypothesis: residual of G_init vanishes mod pi^start_degree
};

// Proposition-style commutation solver: given P_j and G_init with residual
// vanishing mod pi^m, produce the unique G_j == G_init mod pi^m with
// G_{j-1} gamma(P_j) = P_j phi(G_j).  Everything is done at the context of
// the inputs; callers boost and verify.
inline std::vector<SeriesMat> solve_G(const std::vector<SeriesMat>& Phat, const std::vector<SeriesMat>& Ginit,
                                      const GammaChar& gamma, const EmbeddedHodge& k, const SolveGOptions& opt) {
    const int a = (int)Phat.size();
    const int d = Phat[0].rows;
    const auto& ctx = Phat[0].data[0].ctx;
    const int M = Phat[0].data[0].M;
    const int m = opt.start_degree;

    long long K1 = 0, K = 0;
    for (int j = 0; j < a; ++j) {
        K1 += k.k[j][0];
        K += k.row_sum(j);
    }
    if ((long long)a * m < K1) throw math_error("solve_G: start degree below kbar_1");
    if ((long long)a * m == K1) {
        // the boundary degree n = kbar_1 needs the invertible-mod-p shape
        bool strict = true, positive = true;
        for (const auto& row : k.k) {
            if (row.size() >= 2 && row[row.size() - 2] <= row.back()) strict = false;
            if (row.back() < 1) positive = false;
        }
        if (!(d == 1 || strict || positive))
            throw math_error("solve_G: degenerate boundary kbar_1 in Z with k_{j,d-1} = 0 (refused)");
    }

    TruncSeries gpi = gamma_pi(ctx, M, gamma);
    TruncSeries fpi = phi_pi(ctx, M, 1);
    TruncSeries fpa = phi_pi(ctx, M, a);

    // hypothesis check: per-j residual vanishes mod pi^m
    for (int j = 0; j < a; ++j) {
        int jm1 = (j + a - 1) % a;
        SeriesMat res = Ginit[jm1] * wdetail::substituted(Phat[j], gpi, 0) -
                        Phat[j] * wdetail::substituted(Ginit[j], fpi, 1);
        if (wdetail::min_pi_order(res) < m) throw math_error("solve_G: initial residual does not vanish mod pi^m");
    }

    // composed matrix s = P_{(0)} = P_1 phi(P_2) ... phi^{a-1}(P_0)
    SeriesMat s = Phat[1 % a];
    for (int l = 1; l < a; ++l) s = s * wdetail::substituted(Phat[(1 + l) % a], phi_pi(ctx, M, l), l);
    SeriesMat gs = wdetail::substituted(s, gpi, 0);
    Mat<UnramElem> s0 = wdetail::coeff_of(s, 0);
    UnramElem dets0 = det(s0);
    // det s0 = unit * p^K: extract the unit
    UnramElem detunit = dets0.div_pk((int)K);
    if (!detunit.is_unit()) throw math_error("solve_G: det P_{(0)}(0) != unit * p^K");
    Mat<UnramElem> adj0 = adjugate(s0);
    UnramElem uinv = detunit.invert();
    // W = p^{K1} s0^{-1} = adj(s0) uinv / p^{K - K1}; integrality is the
    // q^{a kbar_1} P^{-1} precondition
    Mat<UnramElem> Wmat = wdetail::div_pk_mat(adj0 * uinv, (int)(K - K1), "solve_G precondition q^{a kbar1} P^{-1}");

    // b = G_init[0]; Zres = b gamma(s) - s phi^a(b)
    SeriesMat b = Ginit[0];
    SeriesMat phab = wdetail::substituted(b, fpa, a);
    SeriesMat Zres = b * gs - s * phab;
    if (wdetail::min_pi_order(Zres) < m) throw math_error("solve_G: composed residual does not vanish mod pi^m");

    // powers of phi^a(pi)
    std::vector<TruncSeries> fpapow(M, TruncSeries::one(ctx, M));
    for (int n = 1; n < M; ++n) fpapow[n] = fpapow[n - 1] * fpa;

    // Each solved degree divides once by p^K, so the recursion is exact only
    // mod p^{N - lost}; the caller's boost absorbs the budget.
    int lost = 0;
    for (int n = m; n < M; ++n) {
        Mat<UnramElem> Tn = wdetail::coeff_of(Zres, n);
        Mat<UnramElem> Bn = Mat<UnramElem>::zero(d, d, ctx->zero());
        if (!Tn.is_zero()) {
            // R_n(0) = Tn * s0^{-1} = Tn adj0 uinv / p^K
            Mat<UnramElem> Rn = wdetail::div_pk_mat(Tn * adj0 * uinv, (int)K, "solve_G residual extraction");
            long long t = (long long)a * n - K1;
            if (t > 0) {
                // B = p^t s0 sigma^a(B) W - R, contraction with factor p^t
                int rounds = (int)(ctx->N / t) + 2;
                Bn = Rn.map([](const UnramElem& e) { return -e; });
                for (int r = 0; r < rounds; ++r) {
                    Bn = (s0 * wdetail::frob_mat(Bn, a) * Wmat).map([&](const UnramElem& e) { return e.times_pk((int)t); });
                    Bn = Bn - Rn;
                }
            } else {
                // boundary n = kbar_1: one linear solve (Id - s0 sigma^a(.) W) B = -R
                Bn = wdetail::solve_boundary_linear(s0, Wmat, a, Rn.map([](const UnramElem& e) { return -e; }));
            }
            wdetail::add_shifted(b, Bn, n);
            // Zres update: + pi^n Bn gamma(s) - s sigma^a(Bn) (phi^a pi)^n
            SeriesMat gshift = gs.map([&](const TruncSeries& x) { return x.shift_up(n); });
            Zres = Zres + wdetail::const_to_series(Bn, M) * gshift;
            Zres = Zres - wdetail::mul_const_scaled(s, wdetail::frob_mat(Bn, a), fpapow[n]);
            lost += (int)K;
        }
        int zord = ctx->N;
        for (const auto& e : wdetail::coeff_of(Zres, n).data) zord = std::min(zord, e.valuation());
        if (zord < ctx->N - lost) throw math_error("solve_G: degree-n residual failed to vanish");
        if (ctx->N - lost <= 0) throw precision_error("solve_G: precision budget exhausted");
    }

    // propagate G_{j-1} = P_j phi(G_j) gamma(P_j)^{-1} by coefficient
    // recursion against gamma(P_j) (constant term A_j Delta_j)
    std::vector<SeriesMat> G(a, b);
    G[0] = b;
    for (int step = 0; step < a - 1; ++step) {
        int j = (a - step) % a;  // j = 0, a-1, ..., 2; solves for G[j-1]
        int jm1 = (j + a - 1) % a;
        SeriesMat rhs = Phat[j] * wdetail::substituted(G[j], fpi, 1);
        SeriesMat gP = wdetail::substituted(Phat[j], gpi, 0);
        Mat<UnramElem> g0 = wdetail::coeff_of(gP, 0);
        long long Kj = k.row_sum(j);
        UnramElem du = det(g0).div_pk((int)Kj);
        if (!du.is_unit()) throw math_error("solve_G: det A_j Delta_j != unit * p^{K_j}");
        Mat<UnramElem> adjg = adjugate(g0);
        UnramElem duinv = du.invert();
        SeriesMat X(d, d, TruncSeries::zero(ctx, M));
        for (int n = 0; n < M; ++n) {
            Mat<UnramElem> acc = wdetail::coeff_of(rhs, n);
            for (int t = 0; t < n; ++t) {
                Mat<UnramElem> xt = wdetail::coeff_of(X, t);
                if (xt.is_zero()) continue;
                acc = acc - xt * wdetail::coeff_of(gP, n - t);
            }
            Mat<UnramElem> xn = wdetail::div_pk_mat(acc * adjg * duinv, (int)Kj, "solve_G propagation");
            wdetail::add_shifted(X, xn, n);
        }
        G[jm1] = X;
    }
    return G;
}

// Max pi-order deficit of the commutation residuals at the given context;
// returns min over j of ord_p(G_{j-1} gamma(P_j) - P_j phi(G_j)) (N when all
// vanish mod p^N).
inline int commutation_residual_ord(const std::vector<SeriesMat>& Phat, const std::vector<SeriesMat>& Ghat,
                                    const GammaChar& gamma) {
    const int a = (int)Phat.size();
    const auto& ctx = Phat[0].data[0].ctx;
    const int M = Phat[0].data[0].M;
    TruncSeries gpi = gamma_pi(ctx, M, gamma);
    TruncSeries fpi = phi_pi(ctx, M, 1);
    int v = ctx->N;
    for (int j = 0; j < a; ++j) {
        int jm1 = (j + a - 1) % a;
        SeriesMat res = Ghat[jm1] * wdetail::substituted(Phat[j], gpi, 0) -
                        Phat[j] * wdetail::substituted(Ghat[j], fpi, 1);
        v = std::min(v, wdetail::min_ord_p(res));
    }
    return v;
}

// --------------------------------------------------------------------------
// Integral Wach module datum.

struct WachModule {
    FieldCtxPtr ctx;  // nominal
    int d = 0;
    int M = 0;
    EmbeddedHodge k;
    std::vector<Mat<UnramElem>> A;  // the strongly divisible datum mod pi
    GammaChar gamma;
    int m_weight = 0;      // floor(kbar1)+1, or ceil(kbar1) in the boundary case
    int start_degree = 0;  // degree the G-recursion started at

    FieldCtxPtr bctx;                   // boosted working context
    std::vector<SeriesMat> Phat_b, Ghat_b;
    std::vector<SeriesMat> Phat, Ghat;  // nominal views
    int residual_ord = 0;               // certified residual valuation (>= N on success)
    int cocycle_ord = 0;                // gamma^2 cocycle residual valuation
    std::vector<std::string> flags;

    // G-matrices for gamma^e via the cocycle G_{gamma eta} = G_gamma gamma(G_eta):
    // G_{gamma^{t+1}} = G_gamma * gamma(G_{gamma^t}), always substituting the
    // base generator.
    std::vector<SeriesMat> gamma_power_matrices(int e) const {
        if (e < 1) throw input_error("gamma_power_matrices: e >= 1");
        std::vector<SeriesMat> acc = Ghat_b;
        TruncSeries gpi = gamma_pi(bctx, M, gamma);
        for (int t = 1; t < e; ++t)
            for (int j = 0; j < (int)acc.size(); ++j) acc[j] = Ghat_b[j] * wdetail::substituted(acc[j], gpi, 0);
        return acc;
    }
};

// m = floor(kbar1) + 1, or ceil(kbar1) in the boundary cases where the
// degree-kbar1 map stays invertible mod p: d = 1, or k_{j,d-1} > k_{j,d}
// for every j, or k_{j,d} >= 1 for every j.  Clamped to >= 1.
inline int weight_threshold(const EmbeddedHodge& k) {
    Rat kbar1 = k.kbar1();
    bool strict = true, positive = true;
    for (const auto& row : k.k) {
        if (row.size() >= 2 && row[row.size() - 2] <= row.back()) strict = false;
        if (row.back() < 1) positive = false;
    }
    bool boundary_ok = (k.d() == 1) || strict || positive;
    long long fl = kbar1.num / kbar1.den;  // kbar1 >= 0
    bool integer = (kbar1.den == 1);
    int m;
    if (integer && boundary_ok)
        m = (int)fl;  // ceil = floor for integers
    else
        m = (int)(fl + 1);  // ceil for non-integers; floor+1 past the boundary
    return std::max(m, 1);
}

// --------------------------------------------------------------------------
// Stage 1 of the Fontaine-Laffaille lift: A_j-hat through degree p-2 with
// G = Id (all beta-denominators are units there); the pi^{p-1} truncation is
// the stage interface.

inline std::vector<SeriesMat> solve_P_stage1(const std::vector<Mat<UnramElem>>& A, const EmbeddedHodge& k,
                                             const GammaChar& gamma, const FieldCtxPtr& ctx, int M) {
    const int a = (int)A.size();
    const int d = A[0].rows;
    const long long p = ctx->p;
    TruncSeries gpi = gamma_pi(ctx, M, gamma);
    TruncSeries qg = q_gamma_ratio(ctx, M, gamma);   // gamma(q)/q
    TruncSeries qginv = qg.invert_unit();            // q/gamma(q)
    std::vector<SeriesMat> Ahat;
    for (int j = 0; j < a; ++j) {
        // H = Delta(q) Id^phi Delta(q)^{-gamma} = Diag((q/gamma(q))^{k_i})
        SeriesMat H(d, d, TruncSeries::zero(ctx, M));
        for (int i = 0; i < d; ++i) H.at(i, i) = ScaledSeries::from_trunc(qginv).pow_int(k.k[j][i]).to_trunc();
        SeriesMat s = wdetail::const_to_series(A[j], M);
        for (int n = 1; n <= (int)p - 2 && n < M; ++n) {
            // f(s) = gamma(s) - s H; need [pi^n] f = 0
            SeriesMat f = wdetail::substituted(s, gpi, 0) - s * H;
            if (wdetail::min_pi_order(f) < n) throw math_error("solve_P: residual dropped below degree");
            Mat<UnramElem> R = wdetail::coeff_of(f, n);
            if (R.is_zero()) continue;
            BigInt cn = mod_reduce(pow_big(gamma.c, n) - 1, ctx->pN);
            if (ord_p_residue(cn, ctx->p, ctx->N) != 0)
                throw precision_error("solve_P: chi^n - 1 not a unit below degree p-1");
            UnramElem cinv = ctx->from_scalar(cn).invert();
            Mat<UnramElem> S = R.map([&](const UnramElem& e) { return -(e * cinv); });
            wdetail::add_shifted(s, S, n);
        }
        // truncate at pi^{p-1}
        for (auto& e : s.data)
            for (int n = (int)p - 1; n < M; ++n) e.a[n] = ctx->zero();
        Ahat.push_back(s);
    }
    return Ahat;
}

// General solve_P (diagonal G, arbitrary degrees): per-coefficient
// beta-denominators; returns matrices of ScaledSeries together with the
// realized denominator exponents.
struct SolvePResult {
    std::vector<Mat<ScaledSeries>> Ahat;
    std::vector<int> max_denom;  // per embedding
};

inline SolvePResult solve_P(const std::vector<Mat<UnramElem>>& A, const std::vector<std::vector<TruncSeries>>& Gdiag,
                            const EmbeddedHodge& k, const GammaChar& gamma, const FieldCtxPtr& ctx, int M) {
    const int a = (int)A.size();
    const int d = A[0].rows;
    BetaTable beta = BetaTable::make(gamma, M);
    TruncSeries gpi = gamma_pi(ctx, M, gamma);
    TruncSeries fpi = phi_pi(ctx, M, 1);
    TruncSeries qginv = q_gamma_ratio(ctx, M, gamma).invert_unit();
    SolvePResult out;
    for (int j = 0; j < a; ++j) {
        int jm1 = (j + a - 1) % a;
        // H = Diag(phi(g_i) (q/gamma q)^{k_i}); G_{j-1} on the left
        SeriesMat H(d, d, TruncSeries::zero(ctx, M));
        for (int i = 0; i < d; ++i)
            H.at(i, i) = Gdiag[j][i].substituted(fpi, 1) * ScaledSeries::from_trunc(qginv).pow_int(k.k[j][i]).to_trunc();
        SeriesMat GL(d, d, TruncSeries::zero(ctx, M));
        for (int i = 0; i < d; ++i) GL.at(i, i) = Gdiag[jm1][i];

        // s as per-coefficient scaled matrices: track one exponent per degree
        std::vector<Mat<UnramElem>> S(M, Mat<UnramElem>::zero(d, d, ctx->zero()));
        std::vector<int> exp(M, 0);
        S[0] = A[j];
        int maxd = 0;
        for (int n = 1; n < M; ++n) {
            // f(s) = GL gamma(s) - s H with s = sum p^{-exp[t]} S[t] pi^t;
            // rebuild s scaled by the current common exponent (M is small)
            SeriesMat scur(d, d, TruncSeries::zero(ctx, M));
            int ecur = 0;
            for (int t = 0; t < M; ++t) ecur = std::max(ecur, exp[t]);
            for (int t = 0; t < M; ++t) {
                Mat<UnramElem> lifted = S[t].map([&](const UnramElem& x) { return x.times_pk(ecur - exp[t]); });
                wdetail::add_shifted(scur, lifted, t);
            }
            SeriesMat f = GL * wdetail::substituted(scur, gpi, 0) - scur * H;
            if (wdetail::min_pi_order(f) < n) throw math_error("solve_P: residual dropped below degree");
            Mat<UnramElem> R = wdetail::coeff_of(f, n);  // scaled by p^{-ecur}
            if (R.is_zero()) continue;
            BigInt cn = mod_reduce(pow_big(gamma.c, n) - 1, ctx->pN);
            int vn = ord_p_residue(cn, ctx->p, ctx->N);
            if (vn >= ctx->N) throw precision_error("solve_P: chi(gamma)^n = 1 at working precision");
            UnramElem cunit = ctx->from_scalar(cn).div_pk(vn);
            UnramElem cinv = cunit.invert();
            Mat<UnramElem> Sn = R.map([&](const UnramElem& e) { return -(e * cinv); });
            exp[n] = ecur + vn;
            // normalize
            int vmin = ctx->N;
            for (const auto& e : Sn.data) vmin = std::min(vmin, e.valuation());
            int strip = std::min(vmin, exp[n]);
            if (strip > 0) {
                Sn = Sn.map([&](const UnramElem& e) { return e.div_pk(strip); });
                exp[n] -= strip;
            }
            S[n] = Sn;
            if (exp[n] > beta.ord[n]) throw math_error("solve_P: denominator exceeded the beta budget");
            maxd = std::max(maxd, exp[n]);
        }
        Mat<ScaledSeries> Aj(d, d, ScaledSeries(TruncSeries::zero(ctx, M), 0));
        for (int r = 0; r < d; ++r)
            for (int c = 0; c < d; ++c) {
                int e = 0;
                for (int n = 0; n < M; ++n) e = std::max(e, exp[n]);
                TruncSeries body(ctx, M);
                for (int n = 0; n < M; ++n) body.a[n] = S[n].at(r, c).times_pk(e - exp[n]);
                Aj.at(r, c) = ScaledSeries(body, e).normalized();
            }
        out.Ahat.push_back(Aj);
        out.max_denom.push_back(maxd);
    }
    return out;
}

// Delta-hat = Diag(q^{k_{j,i}})
inline SeriesMat delta_hat(const FieldCtxPtr& ctx, int M, const std::vector<long long>& krow) {
    const int d = (int)krow.size();
    TruncSeries q = q_elem(ctx, M);
    SeriesMat m(d, d, TruncSeries::zero(ctx, M));
    for (int i = 0; i < d; ++i) {
        TruncSeries e = TruncSeries::one(ctx, M);
        for (long long t = 0; t < krow[i]; ++t) e = e * q;
        m.at(i, i) = e;
    }
    return m;
}

namespace wdetail {

// det(Phat_j) must equal unit-series * q^{K_j}; verified by exact division.
inline bool det_is_unit_times_qK(const SeriesMat& Pj, long long Kj) {
    const auto& ctx = Pj.data[0].ctx;
    const int M = Pj.data[0].M;
    TruncSeries dP = det(Pj);
    TruncSeries q = q_elem(ctx, M);
    try {
        for (long long t = 0; t < Kj; ++t) dP = exact_divide(dP, q);
    } catch (const math_error&) {
        return false;
    }
    return dP.is_unit();
}

}  // namespace wdetail

// --------------------------------------------------------------------------
// Fontaine-Laffaille lifting: stage 1 (A-hat through pi^{p-1} with G = Id),
// stage 2 (solve_G from degree p-1), residuals and the gamma^2 cocycle
// verified at the nominal precision with escalation.

inline WachModule fl_lift(const RepSpec& spec, int M, std::optional<GammaChar> gamma_in = std::nullopt) {
    spec.validate();
    const auto& ctx = spec.ctx;
    const long long p = ctx->p;
    if (M < p - 1) throw input_error("fl_lift: pi-precision M >= p-1 required");

    int m = weight_threshold(spec.k);
    if (m > (int)p - 1)
        throw math_error("fl_lift: weight precondition violated (kbar_1 < p-1, or <= p-1 with k_{j,d-1} > 0)");

    // The degree recursion divides by p^K once per degree; a boost of
    // K*(M+2) digits keeps the returned matrices exact mod p^N even in the
    // worst compounding case, with one escalation as insurance.
    long long K = spec.k.total();
    int emax = lambda_denom_budget(ctx, M);
    std::vector<int> boosts = {ctx->N + (int)K * (M + 2) + emax + 16, ctx->N + 2 * (int)K * (M + 2) + emax + 64};
    std::string last_err;
    for (int bi = 0; bi < (int)boosts.size(); ++bi) {
        auto bctx = ctx->with_precision(boosts[bi]);
        // The default generator is recreated at the boosted cap (the
        // Teichmueller value extends consistently); a custom character value
        // is only known at its own cap.
        GammaChar gamma;
        if (!gamma_in || gamma_in->is_generator)
            gamma = default_generator(bctx, M);
        else {
            gamma = *gamma_in;
            if (!gamma.exact_value && gamma.cap < gamma_cap_for(bctx, M))
                throw precision_error("fl_lift: custom gamma value stored at insufficient precision");
        }
        try {
            std::vector<Mat<UnramElem>> Ab;
            for (const auto& mA : spec.A)
                Ab.push_back(mA.map([&](const UnramElem& e) { return bctx->from_coeffs(e.c); }));

            auto Ahat = solve_P_stage1(Ab, spec.k, gamma, bctx, M);
            std::vector<SeriesMat> Phat;
            for (int j = 0; j < spec.a(); ++j) Phat.push_back(Ahat[j] * delta_hat(bctx, M, spec.k.k[j]));

            std::vector<SeriesMat> Ginit(spec.a(), SeriesMat::identity(spec.d, TruncSeries::zero(bctx, M)));
            SolveGOptions opt{std::max((int)p - 1, m)};
            auto Ghat = solve_G(Phat, Ginit, gamma, spec.k, opt);

            // verification at nominal precision
            WachModule W;
            W.ctx = ctx;
            W.d = spec.d;
            W.M = M;
            W.k = spec.k;
            W.A = spec.A;
            W.gamma = gamma;
            W.m_weight = m;
            W.start_degree = opt.start_degree;
            W.bctx = bctx;
            W.Phat_b = Phat;
            W.Ghat_b = Ghat;
            for (int j = 0; j < spec.a(); ++j) {
                W.Phat.push_back(wdetail::reduced_to(Phat[j], ctx));
                W.Ghat.push_back(wdetail::reduced_to(Ghat[j], ctx));
            }
            W.residual_ord = commutation_residual_ord(W.Phat, W.Ghat, gamma);
            if (W.residual_ord < ctx->N) {
                last_err = "residual verification failed at nominal precision";
                continue;
            }
            // gamma^2 cocycle: G2_j = G_j gamma(G_j) must satisfy the system for gamma^2
            GammaChar g2 = gamma_square(gamma);
            std::vector<SeriesMat> G2;
            TruncSeries gpi = gamma_pi(bctx, M, gamma);
            for (int j = 0; j < spec.a(); ++j) G2.push_back(Ghat[j] * wdetail::substituted(Ghat[j], gpi, 0));
            std::vector<SeriesMat> G2n;
            for (auto& g : G2) G2n.push_back(wdetail::reduced_to(g, ctx));
            W.cocycle_ord = commutation_residual_ord(W.Phat, G2n, g2);
            if (W.cocycle_ord < ctx->N) {
                last_err = "gamma^2 cocycle verification failed";
                continue;
            }
            // det P_j = det(A_j-hat) q^{K_j} with det(A_j-hat) a unit series
            for (int j = 0; j < spec.a(); ++j)
                if (!det(Ahat[j]).is_unit()) throw math_error("fl_lift: det A_j-hat is not a unit series");
            return W;
        } catch (const precision_error& e) {
            last_err = e.what();
            continue;
        } catch (const math_error& e) {
            last_err = e.what();
            continue;
        }
    }
    throw math_error(std::string("fl_lift: failed after precision escalation: ") + last_err);
}

// --------------------------------------------------------------------------
// Commutant solver (G M^gamma = M G) with beta-denominators.

struct CommutantResult {
    Mat<ScaledSeries> Mhat;
    int max_denom;
};

inline CommutantResult commutant(const SeriesMat& G, const GammaChar& gamma, const Mat<UnramElem>& M0) {
    const auto& ctx = G.data[0].ctx;
    const int M = G.data[0].M;
    const int d = G.rows;
    BetaTable beta = BetaTable::make(gamma, M);
    TruncSeries gpi = gamma_pi(ctx, M, gamma);

    std::vector<Mat<UnramElem>> S(M, Mat<UnramElem>::zero(d, d, ctx->zero()));
    std::vector<int> exp(M, 0);
    S[0] = M0;
    int maxd = 0;
    for (int n = 1; n < M; ++n) {
        int ecur = 0;
        for (int t = 0; t < M; ++t) ecur = std::max(ecur, exp[t]);
        SeriesMat scur(d, d, TruncSeries::zero(ctx, M));
        for (int t = 0; t < M; ++t)
            wdetail::add_shifted(scur, S[t].map([&](const UnramElem& x) { return x.times_pk(ecur - exp[t]); }), t);
        SeriesMat f = G * wdetail::substituted(scur, gpi, 0) - scur * G;
        if (wdetail::min_pi_order(f) < n) throw math_error("commutant: residual dropped below degree");
        Mat<UnramElem> R = wdetail::coeff_of(f, n);
        if (R.is_zero()) continue;
        BigInt cn = mod_reduce(pow_big(gamma.c, n) - 1, ctx->pN);
        int vn = ord_p_residue(cn, ctx->p, ctx->N);
        if (vn >= ctx->N) throw precision_error("commutant: chi(gamma)^n = 1 at working precision");
        UnramElem cinv = ctx->from_scalar(cn).div_pk(vn).invert();
        Mat<UnramElem> Sn = R.map([&](const UnramElem& e) { return -(e * cinv); });
        exp[n] = ecur + vn;
        int vmin = ctx->N;
        for (const auto& e : Sn.data) vmin = std::min(vmin, e.valuation());
        int strip = std::min(vmin, exp[n]);
        if (strip > 0) {
            Sn = Sn.map([&](const UnramElem& e) { return e.div_pk(strip); });
            exp[n] -= strip;
        }
        S[n] = Sn;
        if (exp[n] > beta.ord[n]) throw math_error("commutant: denominator exceeded the beta budget");
        maxd = std::max(maxd, exp[n]);
    }
    Mat<ScaledSeries> out(d, d, ScaledSeries(TruncSeries::zero(ctx, M), 0));
    int e = 0;
    for (int n = 0; n < M; ++n) e = std::max(e, exp[n]);
    for (int r = 0; r < d; ++r)
        for (int c = 0; c < d; ++c) {
            TruncSeries body(ctx, M);
            for (int n = 0; n < M; ++n) body.a[n] = S[n].at(r, c).times_pk(e - exp[n]);
            out.at(r, c) = ScaledSeries(body, e).normalized();
        }
    return CommutantResult{out, maxd};
}

// --------------------------------------------------------------------------
// Continuity transport (Theorem-C machinery): given W for A and A' with
// ord(A'_j - A_j) >= eps + i, produce W' with matrices congruent to W's
// mod p^i.

inline int epsilon_of(const WachModule& W) {
    long long p = W.ctx->p;
    return (int)std::max(0LL, ((long long)(W.m_weight - 1) * p) / ((p - 1) * (p - 1)));
}

inline WachModule continuity_transport(const WachModule& W, const std::vector<Mat<UnramElem>>& Aprime, int i) {
    const auto& ctx = W.ctx;
    if (i > ctx->N) throw math_error("continuity_transport: target congruence exceeds p-precision");
    int eps = epsilon_of(W);
    // n = min_j ord(A'_j - A_j)
    int n = ctx->N;
    for (int j = 0; j < (int)W.A.size(); ++j) {
        Mat<UnramElem> diff = Aprime[j] - W.A[j];
        for (const auto& e : diff.data) n = std::min(n, e.valuation());
    }
    if (n >= ctx->N) return W;  // A' == A at precision
    if (n < eps + i) throw math_error("continuity_transport: ord(A' - A) < eps + i");

    const auto& bctx = W.bctx;
    const int M = W.M;
    const int a = (int)W.A.size();
    std::vector<SeriesMat> Pp = W.Phat_b;
    for (int j = 0; j < a; ++j) {
        Mat<UnramElem> diff = Aprime[j] - W.A[j];
        Mat<UnramElem> diffb = diff.map([&](const UnramElem& e) { return bctx->from_coeffs(e.c); });
        Mat<UnramElem> Ab = W.A[j].map([&](const UnramElem& e) { return bctx->from_coeffs(e.c); });
        Mat<UnramElem> Mj = wdetail::div_pk_mat(diffb * invert_gl(Ab), n, "continuity_transport M_j");
        int jm1 = (j + a - 1) % a;
        auto com = commutant(W.Ghat_b[jm1], W.gamma, Mj);
        // p^eps * (Mhat mod pi^m) must be integral (beta-ord <= eps below m)
        SeriesMat Mm(W.d, W.d, TruncSeries::zero(bctx, M));
        for (int r = 0; r < W.d; ++r)
            for (int c = 0; c < W.d; ++c) {
                ScaledSeries s = com.Mhat.at(r, c);
                TruncSeries body(bctx, M);
                for (int deg = 0; deg < W.m_weight && deg < M; ++deg) body.a[deg] = s.body.a[deg];
                ScaledSeries pe(body.times_pk(eps), s.denom_exp);
                Mm.at(r, c) = pe.normalized().to_trunc();
            }
        // P'_j = (Id + p^{n-eps} Mm) P_j
        SeriesMat X = Mm.map([&](const TruncSeries& t) { return t.times_pk(n - eps); });
        SeriesMat IdM = SeriesMat::identity(W.d, TruncSeries::zero(bctx, M));
        Pp[j] = (IdM + X) * W.Phat_b[j];
    }
    SolveGOptions opt{W.m_weight};
    auto Gp = solve_G(Pp, W.Ghat_b, W.gamma, W.k, opt);

    WachModule out = W;
    out.A = Aprime;
    out.Phat_b = Pp;
    out.Ghat_b = Gp;
    out.Phat.clear();
    out.Ghat.clear();
    for (int j = 0; j < a; ++j) {
        out.Phat.push_back(wdetail::reduced_to(Pp[j], ctx));
        out.Ghat.push_back(wdetail::reduced_to(Gp[j], ctx));
    }
    out.residual_ord = commutation_residual_ord(out.Phat, out.Ghat, out.gamma);
    if (out.residual_ord < ctx->N) throw math_error("continuity_transport: residual verification failed");
    // the congruence the theorem promises
    for (int j = 0; j < a; ++j) {
        SeriesMat dP = out.Phat[j] - W.Phat[j];
        SeriesMat dG = out.Ghat[j] - W.Ghat[j];
        if (wdetail::min_ord_p(dP) < i || wdetail::min_ord_p(dG) < i)
            throw math_error("continuity_transport: output not congruent mod p^i");
    }
    return out;
}

}  // namespace wachlab
