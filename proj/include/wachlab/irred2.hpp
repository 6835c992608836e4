#pragma once

// Irreducibility of 2-dimensional specs with Hodge rows (k_j, 0): the
// Newton polygon of the phi^a-matrix either hits a subset sum of the k_j
// (reducible) or misses them all (irreducible).  A reducible verdict comes
// with an eigen-chain witness A_j Delta_{k_j} (x_j,y_j)^T = w_j
// (x_{j-1},y_{j-1})^T verified exactly at the working precision.

#include "wachlab/repdata.hpp"

#include <set>

namespace wachlab {

struct ReducibilityWitness {
    std::vector<int> J;  // embeddings where w_j has valuation k_j
    std::vector<UnramElem> w;
    std::vector<std::pair<UnramElem, UnramElem>> xy;
};

struct IrredVerdict {
    bool reducible = false;
    bool criterion_slopes = false;  // some NP slope is a subset sum
    bool criterion_trace = false;   // the trace dichotomy
    Polygon np;                     // NP of phi^a (not divided by a)
    std::vector<long long> subset_sums;
    std::optional<ReducibilityWitness> witness;
    std::string witness_note;  // set when extraction failed (typed reason)
};

namespace detail {

inline std::set<long long> subset_sums_of(const std::vector<long long>& kj) {
    std::set<long long> sums;
    const int a = (int)kj.size();
    for (unsigned mask = 0; mask < (1u << a); ++mask) {
        long long s = 0;
        for (int j = 0; j < a; ++j)
            if (mask & (1u << j)) s += kj[j];
        sums.insert(s);
    }
    return sums;
}

// Square root of a unit by brute force mod p then Hensel (p odd).
inline std::optional<UnramElem> sqrt_unit(const UnramElem& u) {
    const auto& ctx = u.ctx;
    auto ctx1 = ctx->with_precision(1);
    UnramElem ur = u.reduced_to(ctx1);
    // enumerate residue field
    BigInt q = 1;
    for (int i = 0; i < ctx->f; ++i) q *= ctx->p;
    std::optional<UnramElem> root1;
    for (BigInt w = 0; w < q; ++w) {
        BigInt t = w;
        std::vector<BigInt> c(ctx->f);
        for (int i = 0; i < ctx->f; ++i) {
            c[i] = t % ctx->p;
            t /= ctx->p;
        }
        UnramElem cand = ctx1->from_coeffs(c);
        if (cand * cand == ur) {
            root1 = cand;
            break;
        }
    }
    if (!root1) return std::nullopt;
    // Hensel: x <- (x + u/x)/2
    std::vector<BigInt> c0 = root1->c;
    c0.resize(ctx->f, BigInt(0));
    UnramElem x = ctx->from_coeffs(c0);
    UnramElem half = ctx->from_scalar(2).invert();
    for (int it = 0; it < ctx->N + 2; ++it) x = (x + u * x.invert()) * half;
    if (!(x * x == u)) return std::nullopt;
    return x;
}

}  // namespace detail

// The two eigenvalue valuations of X^2 - tX + det from the Newton polygon,
// or a precision error when ord(t) cannot be separated from K/2.
struct EigenVals {
    bool equal_slopes;
    long long ord_small;  // meaningful when !equal_slopes (ord_small < K - ord_small)
    long long K;
};

inline EigenVals eigenvalue_valuations(const UnramElem& t, long long K, int N) {
    int ordt = t.valuation();
    if (ordt < N) {
        if (2 * (long long)ordt < K) return EigenVals{false, (long long)ordt, K};
        return EigenVals{true, 0, K};
    }
    // ord t >= N
    if (2LL * N > K) return EigenVals{true, 0, K};
    throw precision_error("is_irreducible: ord_p(trace) not separable from K/2 at precision N");
}

// Hensel-extract a root of X^2 - tX + det with the prescribed valuation tau.
// Requires separability: distinct slopes, or equal slopes with discriminant
// valuation < N/2.
inline UnramElem quadratic_root(const UnramElem& t, const UnramElem& dt, long long tau, const EigenVals& ev) {
    const auto& ctx = t.ctx;
    if (!ev.equal_slopes) {
        long long small = ev.ord_small, big = ev.K - ev.ord_small;
        if (tau != small && tau != big) throw math_error("quadratic_root: no root with that valuation");
        // small root: omega = w/p^small satisfies omega^2 - (t/p^small) omega + det/p^{2 small} = 0
        UnramElem tt = t.div_pk((int)small);
        UnramElem dd = dt.div_pk((int)(2 * small));
        UnramElem omega = tt;
        UnramElem two = ctx->from_scalar(2);
        for (int it = 0; it < ctx->N + 2; ++it) {
            UnramElem F = omega * omega - tt * omega + dd;
            UnramElem dF = two * omega - tt;  // unit near omega0 = tt
            omega = omega - F * dF.invert();
        }
        UnramElem wsmall = omega.times_pk((int)small);
        if (tau == small) return wsmall;
        // big root = det / small root; small root = p^small * unit
        UnramElem unit = wsmall.div_pk((int)small);
        return dt.div_pk((int)small) * unit.invert();
    }
    // equal slopes: tau = K/2; roots (t +- sqrt(disc))/2
    if (ev.K % 2 != 0 || tau != ev.K / 2) throw math_error("quadratic_root: no root with that valuation");
    UnramElem half = ctx->from_scalar(2).invert();
    UnramElem disc = t * t - dt.scaled(4);
    int vd = disc.valuation();
    // disc == 0 at this (boosted) precision: t/2 is a double root to the
    // full working margin; the final exact chain verification decides.
    if (vd >= ctx->N) return t * half;
    if (vd % 2 != 0) throw nonseparable_error("quadratic_root: no O_E-rational eigenvalue (odd discriminant valuation)");
    if (2 * vd >= ctx->N) throw nonseparable_error("quadratic_root: discriminant valuation >= N/2");
    auto sq = detail::sqrt_unit(disc.div_pk(vd));
    if (!sq) throw nonseparable_error("quadratic_root: no O_E-rational eigenvalue (non-square discriminant)");
    return (t + sq->times_pk(vd / 2)) * half;
}

// Witness extraction for a reducible spec: Hensel-factor char(P_{(0)}),
// compute an eigenvector with unit content, propagate through the cycle.
// Computed at an internally boosted precision so the returned data satisfies
// the eigen-chain equations exactly mod p^N.
inline ReducibilityWitness witness(const RepSpec& spec, const std::vector<int>& J) {
    spec.validate();
    if (spec.d != 2) throw input_error("witness: d = 2 only");
    const int a = spec.a();
    long long K = 0;
    std::vector<long long> kj(a);
    for (int j = 0; j < a; ++j) {
        if (spec.k.k[j][1] != 0) throw input_error("witness: Hodge rows must be (k_j, 0)");
        kj[j] = spec.k.k[j][0];
        K += kj[j];
    }
    long long tau = 0;
    for (int j : J) tau += kj[j];

    const auto& ctx = spec.ctx;
    auto bctx = ctx->with_precision(ctx->N + 2 * (int)K + 6);
    RepSpec bs = spec;
    bs.ctx = bctx;
    for (auto& m : bs.A) m = m.map([&](const UnramElem& e) { return bctx->from_coeffs(e.c); });

    Mat<UnramElem> P = phi_power(bs, 0);
    UnramElem t = P.at(0, 0) + P.at(1, 1);
    UnramElem dP = det(P);
    EigenVals ev = eigenvalue_valuations(t.reduced_to(ctx), K, ctx->N);
    UnramElem w = quadratic_root(t, dP, tau, ev);

    // eigenvector with unit content from the rows of P - w
    UnramElem e11 = P.at(0, 0) - w, e12 = P.at(0, 1), e21 = P.at(1, 0), e22 = P.at(1, 1) - w;
    auto content = [&](const UnramElem& x, const UnramElem& y) { return std::min(x.valuation(), y.valuation()); };
    // candidates (e12, -e11) and (-e22, e21); P - w == 0 (scalar matrix)
    // leaves any unit vector as an eigenvector
    UnramElem cx = e12, cy = -e11;
    if (content(cx, cy) > content(-e22, e21)) {
        cx = -e22;
        cy = e21;
    }
    int c0 = content(cx, cy);
    if (c0 >= bctx->N) {
        cx = bctx->one();
        cy = bctx->zero();
        c0 = 0;
    }
    UnramElem vx = cx.div_pk(c0), vy = cy.div_pk(c0);

    // propagate: from v_0, step j = 0, a-1, a-2, ..., 2 gives v_{a-1}..v_1;
    // the j = 1 relation closes the cycle and is checked exactly.
    std::vector<std::pair<UnramElem, UnramElem>> xy(a, {bctx->zero(), bctx->zero()});
    std::vector<UnramElem> ws(a, bctx->zero());
    xy[0] = {vx, vy};
    auto step = [&](int j, const std::pair<UnramElem, UnramElem>& v) {
        Mat<UnramElem> M = bs.A[j] * bs.delta(j);
        UnramElem nx = M.at(0, 0) * v.first + M.at(0, 1) * v.second;
        UnramElem ny = M.at(1, 0) * v.first + M.at(1, 1) * v.second;
        return std::make_pair(nx, ny);
    };
    auto normalize_step = [&](int j, std::pair<UnramElem, UnramElem> tv) {
        int c = content(tv.first, tv.second);
        if (c >= bctx->N) throw nonseparable_error("witness: propagation lost all precision");
        UnramElem mu = tv.first.valuation() <= tv.second.valuation() ? tv.first.div_pk(c) : tv.second.div_pk(c);
        UnramElem wj = mu.times_pk(c);
        UnramElem muinv = mu.invert();
        ws[j] = wj;
        return std::make_pair(tv.first.div_pk(c) * muinv, tv.second.div_pk(c) * muinv);
    };
    if (a == 1) {
        ws[0] = w;
    } else {
        xy[a - 1] = normalize_step(0, step(0, xy[0]));
        for (int j = a - 1; j >= 2; --j) xy[j - 1] = normalize_step(j, step(j, xy[j]));
        // close with j = 1: A_1 Delta_1 v_1 = w_1 v_0 where w_1 = w / prod_{j != 1} w_j
        UnramElem others = bctx->one();
        for (int j = 0; j < a; ++j)
            if (j != 1) others *= ws[j];
        // others is p^{sum}(unit); w has valuation tau
        int vo = others.valuation();
        ws[1] = w.div_pk(vo) * others.div_pk(vo).invert();
    }

    // reduce to nominal precision and verify E:graph exactly, deriving J from
    // the valuation pattern of the w_j
    ReducibilityWitness out;
    out.w.resize(a, ctx->zero());
    out.xy.resize(a, {ctx->zero(), ctx->zero()});
    for (int j = 0; j < a; ++j) {
        out.w[j] = ws[j].reduced_to(ctx);
        out.xy[j] = {xy[j].first.reduced_to(ctx), xy[j].second.reduced_to(ctx)};
    }
    for (int j = 0; j < a; ++j) {
        int vw = out.w[j].valuation();
        if (vw == 0)
            continue;
        else if (vw == kj[j] && kj[j] > 0)
            out.J.push_back(j);
        else
            throw nonseparable_error("witness: step valuation pattern not of the (unit | p^{k_j} unit) form");
    }
    // exact verification at precision N
    for (int j = 0; j < a; ++j) {
        int jm1 = (j + a - 1) % a;
        Mat<UnramElem> M = spec.A[j] * spec.delta(j);
        UnramElem rx = M.at(0, 0) * out.xy[j].first + M.at(0, 1) * out.xy[j].second - out.w[j] * out.xy[jm1].first;
        UnramElem ry = M.at(1, 0) * out.xy[j].first + M.at(1, 1) * out.xy[j].second - out.w[j] * out.xy[jm1].second;
        if (!rx.is_zero() || !ry.is_zero()) throw math_error("witness: eigen-chain verification failed");
        if (std::min(out.xy[j].first.valuation(), out.xy[j].second.valuation()) != 0)
            throw math_error("witness: (x_j, y_j) must have unit content");
    }
    long long sumJ = 0;
    for (int j : out.J) sumJ += kj[j];
    if (sumJ != tau && sumJ != K - tau) throw math_error("witness: subset sum mismatch");
    return out;
}

// Theorem-D classifier: criteria (slopes) and (trace) evaluated
// independently and asserted to agree; witness attached on Reducible.
inline IrredVerdict is_irreducible(const RepSpec& spec) {
    spec.validate();
    if (spec.d != 2) throw input_error("is_irreducible: d = 2 only");
    const int a = spec.a();
    long long K = 0;
    std::vector<long long> kj(a);
    for (int j = 0; j < a; ++j) {
        if (spec.k.k[j][1] != 0) throw input_error("is_irreducible: Hodge rows must be (k_j, 0)");
        kj[j] = spec.k.k[j][0];
        K += kj[j];
    }
    auto sums = detail::subset_sums_of(kj);

    Mat<UnramElem> P = phi_power(spec, 0);
    // rotation invariance of the characteristic polynomial
    auto cp0 = char_poly(P);
    for (int j = 1; j < a; ++j)
        if (!(char_poly(phi_power(spec, j)) == cp0)) throw math_error("phi_power: rotations not conjugate");

    UnramElem t = P.at(0, 0) + P.at(1, 1);
    UnramElem dP = det(P);
    if (dP.valuation() != std::min<long long>(K, spec.ctx->N)) throw math_error("is_irreducible: det valuation != sum k_j");

    EigenVals ev = eigenvalue_valuations(t, K, spec.ctx->N);

    IrredVerdict v;
    v.subset_sums.assign(sums.begin(), sums.end());
    if (ev.equal_slopes) {
        Rat half(K, 2);
        v.np = polygon_from_vals({half, half});
        v.criterion_slopes = (K % 2 == 0) && sums.count(K / 2) > 0;
        v.criterion_trace = (K % 2 == 0) && sums.count(K / 2) > 0;  // ord t > K/2 branch (or = K/2)
    } else {
        long long s = ev.ord_small;
        v.np = polygon_from_vals({Rat(K - s), Rat(s)});
        v.criterion_slopes = sums.count(s) > 0 || sums.count(K - s) > 0;
        v.criterion_trace = 2 * s <= K && sums.count(s) > 0;
    }
    if (v.criterion_slopes != v.criterion_trace)
        throw math_error("is_irreducible: criteria (iv) and (v) disagree");
    v.reducible = v.criterion_slopes;

    if (v.reducible) {
        long long tau = ev.equal_slopes ? K / 2 : (sums.count(ev.ord_small) ? ev.ord_small : K - ev.ord_small);
        std::vector<int> J;
        for (unsigned mask = 0; mask < (1u << a); ++mask) {
            long long s = 0;
            for (int j = 0; j < a; ++j)
                if (mask & (1u << j)) s += kj[j];
            if (s == tau) {
                J.clear();
                for (int j = 0; j < a; ++j)
                    if (mask & (1u << j)) J.push_back(j);
                break;
            }
        }
        try {
            v.witness = witness(spec, J);
        } catch (const nonseparable_error& e) {
            v.witness_note = e.what();
        }
    }
    return v;
}

// Necessary-condition battery for general d: a proper crystalline sub with
// Hodge rows k' requires t_H(k') to be a sum of some d'-subset of the
// sigma-invariant Newton slopes.  Returns the sub-polygon candidates NOT
// excluded; empty output certifies irreducibility only through these tests.
struct SubPolygonCandidate {
    std::vector<std::vector<long long>> krows;
    Rat tH;
};

inline std::vector<SubPolygonCandidate> irreducibility_battery(const RepSpec& spec) {
    spec.validate();
    Polygon np = sigma_np(spec);
    auto slopes = np.expanded();
    const int d = spec.d, a = spec.a();
    std::vector<SubPolygonCandidate> open;
    // all per-row index subsets of equal size d' < d (candidate embedded sub-polygons,
    // one subset choice per row)
    for (int dp = 1; dp < d; ++dp) {
        // enumerate a tuple of row-subsets; combinatorial but small for d <= 3
        std::vector<std::vector<int>> rowsubs;
        std::vector<int> comb(dp);
        std::function<void(int, int)> gen = [&](int start, int pos) {
            if (pos == dp) {
                rowsubs.push_back(comb);
                return;
            }
            for (int i = start; i < d; ++i) {
                comb[pos] = i;
                gen(i + 1, pos + 1);
            }
        };
        gen(0, 0);
        std::vector<size_t> pick(a, 0);
        for (;;) {
            SubPolygonCandidate cand;
            cand.krows.resize(a);
            long long tot = 0;
            for (int j = 0; j < a; ++j) {
                for (int i : rowsubs[pick[j]]) {
                    cand.krows[j].push_back(spec.k.k[j][i]);
                    tot += spec.k.k[j][i];
                }
            }
            cand.tH = Rat(tot, a);
            // does some dp-subset of NP slopes sum to tH?
            bool possible = false;
            std::vector<int> idx(dp);
            std::function<void(int, int, Rat)> scan = [&](int start, int pos, Rat acc) {
                if (possible) return;
                if (pos == dp) {
                    if (acc == cand.tH) possible = true;
                    return;
                }
                for (int i = start; i < (int)slopes.size(); ++i) scan(i + 1, pos + 1, acc + slopes[i]);
            };
            scan(0, 0, Rat(0));
            if (possible) open.push_back(cand);
            int pos = 0;
            while (pos < a) {
                if (++pick[pos] < rowsubs.size()) break;
                pick[pos] = 0;
                ++pos;
            }
            if (pos >= a) break;
        }
    }
    return open;
}

}  // namespace wachlab
