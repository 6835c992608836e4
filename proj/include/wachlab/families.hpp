#pragma once

// The explicit 2-dimensional families V_{k,v,u}: the walk solution of the
// (s_j, t_j) system, lambda_b-power closed forms, the delta_j/z_j
// normalization, and family Wach modules with diagonal initial gamma-data.

#include "wachlab/wach.hpp"

namespace wachlab {

enum class Part { A, B };

struct FamilySpec {
    FieldCtxPtr ctx;
    std::vector<long long> k;  // a integers >= 0
    std::vector<Part> partition;
    std::vector<UnramElem> v;  // a elements of O_E (after scaling; ord v_j >= delta_j required)
    std::vector<UnramElem> u;  // units, used at positions j in B

    int a() const { return (int)k.size(); }
    void validate() const {
        if (!ctx) throw input_error("FamilySpec: missing context");
        if ((int)k.size() != ctx->a || (int)partition.size() != ctx->a || (int)v.size() != ctx->a ||
            (int)u.size() != ctx->a)
            throw input_error("FamilySpec: need k, partition, v, u of length a");
        for (long long kj : k)
            if (kj < 0) throw input_error("FamilySpec: k_j >= 0 required");
        for (int j = 0; j < ctx->a; ++j)
            if (partition[j] == Part::B && !u[j].is_unit()) throw input_error("FamilySpec: u_j must be a unit");
    }
    int sharpA() const {
        int c = 0;
        for (auto t : partition)
            if (t == Part::A) ++c;
        return c;
    }
    long long ksum() const {
        long long s = 0;
        for (long long kj : k) s += kj;
        return s;
    }
    // ceil(kbar_1) = ceil(sum k_j / a)
    int ceil_kbar1() const { return (int)((ksum() + ctx->a - 1) / ctx->a); }

    // The Theorem A' matrices: [[0,-1],[1,v_j]] for j in A, [[1,0],[v_j,u_j]] for j in B.
    RepSpec rep_spec() const {
        RepSpec s;
        s.ctx = ctx;
        s.d = 2;
        s.k.k.resize(a());
        s.A.clear();
        for (int j = 0; j < a(); ++j) {
            s.k.k[j] = {k[j], 0};
            Mat<UnramElem> m(2, 2, ctx->zero());
            if (partition[j] == Part::A) {
                m.at(0, 1) = -ctx->one();
                m.at(1, 0) = ctx->one();
                m.at(1, 1) = v[j];
            } else {
                m.at(0, 0) = ctx->one();
                m.at(1, 0) = v[j];
                m.at(1, 1) = u[j];
            }
            s.A.push_back(m);
        }
        s.validate();
        return s;
    }
};

// Exponent polynomials in the symbol phi from the walk through the
// (s_j, t_j) system: s_j = lambda_b^{(1-gamma) f_j(phi)},
// t_j = lambda_b^{(1-gamma) g_j(phi)}, b = a or 2a by the parity of #A.
struct CycleData {
    int b = 0;
    std::vector<std::vector<long long>> f;  // f[j][e] = coefficient of phi^e
    std::vector<std::vector<long long>> g;
};

// Walk derivation: the system reads X_{j-1} = q^{(1-gamma) e} X_j^phi with
// (X, e) determined by the partition; following it around returns to the
// start after b steps and yields X^{phi^b - 1} = (q/p)^{(gamma-1) f(phi)}.
inline CycleData cycle_exponents(const std::vector<long long>& k, const std::vector<Part>& partition) {
    const int a = (int)k.size();
    CycleData cd;
    // node: (is_t, j); predecessor relation: the node X with X_{j-1} = ... X_j^phi
    auto pred = [&](bool is_t, int j) {
        // returns (is_t', exponent e) with node_{j-1}(is_t) = q^{(1-g) e} node_j(is_t')^phi
        int jj = j;  // the defining relation at index j uses partition[j]
        if (partition[jj] == Part::A) {
            if (!is_t) return std::make_pair(true, 0LL);    // s_{j-1} = t_j^phi
            return std::make_pair(false, k[jj]);            // t_{j-1} = q^{(1-g)k_j} s_j^phi
        }
        if (!is_t) return std::make_pair(false, k[jj]);     // s_{j-1} = q^{(1-g)k_j} s_j^phi
        return std::make_pair(true, 0LL);                   // t_{j-1} = t_j^phi
    };
    auto walk = [&](bool start_t, int start_j) {
        std::vector<long long> coeffs;
        bool is_t = start_t;
        int j = start_j;
        for (int step = 0;; ++step) {
            // relation index: node at position j-1 comes from node at position j;
            // we're AT (is_t, j0) and unfold forward: X_{j0} = q^{(1-g) e} Y_{j0+1}^phi
            int rel = (j + 1) % a;
            auto [next_t, e] = pred(is_t, rel);
            coeffs.push_back(e);
            is_t = next_t;
            j = (j + 1) % a;
            if (j == start_j && is_t == start_t) break;
            if (step > 2 * a + 2) throw error("cycle_exponents: walk failed to close");
        }
        return coeffs;
    };
    cd.f.resize(a);
    cd.g.resize(a);
    int b = 0;
    for (int j = 0; j < a; ++j) {
        auto cf = walk(false, j);
        auto cg = walk(true, j);
        if (b == 0)
            b = (int)cf.size();
        else if ((int)cf.size() != b || (int)cg.size() != b)
            throw error("cycle_exponents: inconsistent cycle lengths");
        // X_j = q^{(1-g)(c_0 + c_1 phi + ...)} X_j^{phi^b}: f_j(phi) = sum c_e phi^e
        cd.f[j] = cf;
        cd.g[j] = cg;
    }
    cd.b = b;
    // b = a iff #A even
    int sharpA = 0;
    for (auto t : partition)
        if (t == Part::A) ++sharpA;
    if ((sharpA % 2 == 0) != (cd.b == a)) throw error("cycle_exponents: parity/cycle-length mismatch");
    return cd;
}

struct CycleSolution {
    CycleData data;
    std::vector<TruncSeries> s, t;  // integral, in 1 + pi Z_p[[pi]]
};

// Solve the (s_j, t_j) system: s_j = prod_e phi^e(lambda_b^{1-gamma})^{f_j,e}.
// Verified by substituting back into the defining equations.
inline CycleSolution cycle_solve(const std::vector<long long>& k, const std::vector<Part>& partition,
                                 const FieldCtxPtr& ctx, int M, const GammaChar& gamma) {
    const int a = (int)k.size();
    CycleSolution out;
    out.data = cycle_exponents(k, partition);
    TruncSeries core = lambda_one_minus_gamma(out.data.b, ctx, M, gamma);  // lambda_b^{1-gamma}
    std::vector<TruncSeries> core_phi;  // phi^e(core), e < b
    core_phi.push_back(core);
    for (int e = 1; e < out.data.b; ++e) core_phi.push_back(phi(core_phi.back(), 1));
    auto build = [&](const std::vector<long long>& poly) {
        TruncSeries acc = TruncSeries::one(ctx, M);
        for (size_t e = 0; e < poly.size(); ++e) {
            long long c = poly[e];
            if (c == 0) continue;
            TruncSeries base = c > 0 ? core_phi[e] : core_phi[e].invert_unit();
            for (long long i = 0; i < (c > 0 ? c : -c); ++i) acc = acc * base;
        }
        return acc;
    };
    for (int j = 0; j < a; ++j) {
        out.s.push_back(build(out.data.f[j]));
        out.t.push_back(build(out.data.g[j]));
    }
    // substitution check of the defining system
    TruncSeries w = q_gamma_ratio(ctx, M, gamma).invert_unit();  // q^{(1-gamma)}
    auto qpow = [&](long long e) {
        TruncSeries r = TruncSeries::one(ctx, M);
        for (long long i = 0; i < e; ++i) r = r * w;
        return r;
    };
    for (int j = 0; j < a; ++j) {
        int jm1 = (j + a - 1) % a;
        TruncSeries lhs_s = out.s[jm1], lhs_t = out.t[jm1];
        TruncSeries rhs_s, rhs_t;
        if (partition[j] == Part::A) {
            rhs_s = phi(out.t[j], 1);
            rhs_t = qpow(k[j]) * phi(out.s[j], 1);
        } else {
            rhs_s = qpow(k[j]) * phi(out.s[j], 1);
            rhs_t = phi(out.t[j], 1);
        }
        if (!(lhs_s == rhs_s) || !(lhs_t == rhs_t)) throw math_error("cycle_solve: system verification failed");
    }
    return out;
}

struct DeltaZ {
    std::vector<int> delta;
    std::vector<TruncSeries> z;  // integral, truncated at pi^{ceil(kbar1)} (widened with zeros)
};

// delta_j = -ord_p(lambda_b^{(g_{j-1}-f_{j-1})(phi)} mod pi^{ceil(kbar1)}),
// z_j = p^{delta_j} (that series); delta_j reported as 0 when k_j = 0.
inline DeltaZ delta_z(const std::vector<long long>& k, const std::vector<Part>& partition, const FieldCtxPtr& ctx,
                      const GammaChar& gamma) {
    const int a = (int)k.size();
    long long ksum = 0;
    for (long long kj : k) ksum += kj;
    int mt = (int)((ksum + a - 1) / a);  // ceil(kbar1)
    int Mt = std::max(mt, 1);
    CycleData cd = cycle_exponents(k, partition);

    // lambda_b at a boosted precision covering the scaled-power arithmetic
    int emax = lambda_denom_budget(ctx, Mt);
    long long ops = 0;
    for (int j = 0; j < a; ++j)
        for (long long c : cd.f[j]) ops += std::max(c, -c);
    for (int j = 0; j < a; ++j)
        for (long long c : cd.g[j]) ops += std::max(c, -c);
    int Nint = ctx->N + (int)(emax * (2 * ops + 2 * Mt + 8)) + 8;
    auto bctx = ctx->with_precision(Nint);
    ScaledSeries lam = lambda_b(cd.b, bctx, Mt);
    std::vector<ScaledSeries> lam_phi{lam};
    for (int e = 1; e < cd.b; ++e)
        lam_phi.push_back(ScaledSeries(phi(lam_phi.back().body, 1), lam_phi.back().denom_exp).normalized());

    DeltaZ out;
    for (int j = 0; j < a; ++j) {
        int jm1 = (j + a - 1) % a;
        ScaledSeries h = ScaledSeries::from_trunc(TruncSeries::one(bctx, Mt));
        for (int e = 0; e < cd.b; ++e) {
            long long c = cd.g[jm1][e] - cd.f[jm1][e];
            if (c == 0) continue;
            h = (h * lam_phi[e].pow_int(c)).normalized();
        }
        h = h.normalized();
        // delta = max(0, denom - min coefficient valuation) = denom after normalize
        int delta = h.denom_exp;
        TruncSeries z = h.body;  // p^{delta} h
        // reduce to nominal
        z = z.reduced_to(ctx);
        out.delta.push_back(k[j] == 0 ? 0 : delta);
        out.z.push_back(z);
        if (k[j] == 0 && delta != 0)
            // the literal rule delta_j = 0 for k_j = 0; z stays integral via
            // the normalized form (flagged by family_wach)
            out.delta.back() = 0;
    }
    return out;
}

struct FamilyWach {
    WachModule W;
    RepSpec mod_pi_spec;  // the Theorem A' datum the module reduces to mod pi
    DeltaZ dz;
    CycleSolution cyc;
    std::vector<std::string> flags;
};

// Build the family Wach module: P_j(alpha_j) with alpha_j = p^{-delta_j} v_j,
// initial diagonal G = Diag(s_j, t_j) whose residual vanishes mod
// pi^{ceil(kbar1)} (checked), completed by solve_G.
inline FamilyWach family_wach(const FamilySpec& fs, int M) {
    fs.validate();
    const auto& ctx = fs.ctx;
    const int a = fs.a();
    if (M < ctx->p - 1) throw input_error("family_wach: pi-precision M >= p-1 required");
    int m = std::max(fs.ceil_kbar1(), 1);

    FamilyWach out;
    long long Ksum = fs.ksum();
    int emax = lambda_denom_budget(ctx, M);
    std::vector<int> boosts = {ctx->N + (int)Ksum * (M + 2) + emax + 16,
                               ctx->N + 2 * (int)Ksum * (M + 2) + emax + 64};
    std::string last_err;
    for (int boost : boosts) {
        auto bctx = ctx->with_precision(boost);
        GammaChar gamma = default_generator(bctx, M);
        try {
            DeltaZ dz = delta_z(fs.k, fs.partition, bctx, gamma);
            CycleSolution cyc = cycle_solve(fs.k, fs.partition, bctx, M, gamma);

            // alpha_j = p^{-delta_j} v_j (precondition ord v_j >= delta_j)
            std::vector<UnramElem> alpha;
            for (int j = 0; j < a; ++j) {
                if (fs.v[j].valuation() < dz.delta[j])
                    throw math_error("family_wach: ord_p v_j < delta_j");
                alpha.push_back(bctx->from_coeffs(fs.v[j].c).div_pk(dz.delta[j]));
            }

            TruncSeries q = q_elem(bctx, M);
            std::vector<SeriesMat> Phat;
            EmbeddedHodge k2;
            k2.k.resize(a);
            for (int j = 0; j < a; ++j) {
                k2.k[j] = {fs.k[j], 0};
                TruncSeries qk = TruncSeries::one(bctx, M);
                for (long long i = 0; i < fs.k[j]; ++i) qk = qk * q;
                TruncSeries zx = dz.z[j].widened_to(M) * alpha[j];
                if (fs.k[j] == 0) zx = TruncSeries::zero(bctx, M);  // P_j(X_j) := P_j(0)
                SeriesMat P(2, 2, TruncSeries::zero(bctx, M));
                if (fs.partition[j] == Part::A) {
                    P.at(0, 1) = -TruncSeries::one(bctx, M);
                    P.at(1, 0) = qk;
                    P.at(1, 1) = zx;
                } else {
                    UnramElem ub = bctx->from_coeffs(fs.u[j].c);
                    P.at(0, 0) = qk;
                    P.at(1, 0) = qk * zx;
                    P.at(1, 1) = TruncSeries::constant(ub, M);
                }
                Phat.push_back(P);
                if (fs.k[j] == 0 && fs.partition[j] == Part::A)
                    out.flags.push_back("k_j = 0 with j in A: literal P_j(0) rule applied");
            }
            std::vector<SeriesMat> Ginit;
            for (int j = 0; j < a; ++j) {
                SeriesMat G(2, 2, TruncSeries::zero(bctx, M));
                G.at(0, 0) = cyc.s[j];
                G.at(1, 1) = cyc.t[j];
                Ginit.push_back(G);
            }
            // the residual bound of the family construction, then the solver
            auto Ghat = solve_G(Phat, Ginit, gamma, k2, SolveGOptions{m});

            WachModule W;
            W.ctx = ctx;
            W.d = 2;
            W.M = M;
            W.k = k2;
            W.gamma = gamma;
            W.m_weight = m;
            W.start_degree = m;
            W.bctx = bctx;
            W.Phat_b = Phat;
            W.Ghat_b = Ghat;
            RepSpec rs = fs.rep_spec();
            W.A = rs.A;
            for (int j = 0; j < a; ++j) {
                W.Phat.push_back(wdetail::reduced_to(Phat[j], ctx));
                W.Ghat.push_back(wdetail::reduced_to(Ghat[j], ctx));
            }
            W.residual_ord = commutation_residual_ord(W.Phat, W.Ghat, gamma);
            if (W.residual_ord < ctx->N) {
                last_err = "family residual verification failed at nominal precision";
                continue;
            }
            GammaChar g2 = gamma_square(gamma);
            TruncSeries gpi = gamma_pi(bctx, M, gamma);
            std::vector<SeriesMat> G2n;
            for (int j = 0; j < a; ++j)
                G2n.push_back(wdetail::reduced_to(Ghat[j] * wdetail::substituted(Ghat[j], gpi, 0), ctx));
            W.cocycle_ord = commutation_residual_ord(W.Phat, G2n, g2);
            if (W.cocycle_ord < ctx->N) {
                last_err = "family gamma^2 cocycle verification failed";
                continue;
            }

            out.W = std::move(W);
            out.mod_pi_spec = rs;
            out.dz.delta = dz.delta;
            for (auto& z : dz.z) out.dz.z.push_back(z.reduced_to(ctx));
            out.cyc.data = cyc.data;
            for (auto& sj : cyc.s) out.cyc.s.push_back(sj.reduced_to(ctx));
            for (auto& tj : cyc.t) out.cyc.t.push_back(tj.reduced_to(ctx));
            return out;
        } catch (const precision_error& e) {
            last_err = e.what();
            continue;
        } catch (const math_error& e) {
            if (std::string(e.what()).find("ord_p v_j") != std::string::npos) throw;
            last_err = e.what();
            continue;
        }
    }
    throw math_error(std::string("family_wach: failed after precision escalation: ") + last_err);
}

// Prop-5.5 relation: exists a unit w with v_j = w^{(-1)^j} v'_j for all j
// (a even); for odd a the relation forces v = v'.
inline bool isom_relation(const std::vector<UnramElem>& v, const std::vector<UnramElem>& vp,
                          const std::vector<Part>& partition, const std::vector<long long>& k) {
    const int a = (int)v.size();
    for (auto t : partition)
        if (t != Part::A) throw input_error("isom_relation: all-A partition required");
    for (long long kj : k)
        if (kj <= 0) throw input_error("isom_relation: k_j > 0 required");
    if ((int)vp.size() != a) throw input_error("isom_relation: length mismatch");
    auto eq = [&](const UnramElem& x, const UnramElem& y) { return (x - y).is_zero(); };
    if (a % 2 == 1) {
        for (int j = 0; j < a; ++j)
            if (!eq(v[j], vp[j])) return false;
        return true;
    }
    // find a pivot pair with v'_j of minimal valuation to solve for w (or w^{-1})
    int piv = -1, best = v[0].ctx->N + 1;
    for (int j = 0; j < a; ++j) {
        int val = vp[j].valuation();
        if (val < best) {
            best = val;
            piv = j;
        }
    }
    if (best >= v[0].ctx->N) {
        // v' = 0: relation holds iff v = 0
        for (int j = 0; j < a; ++j)
            if (!v[j].is_zero()) return false;
        return true;
    }
    // v_piv = w^{s} v'_piv with s = (-1)^piv: need equal valuations and the
    // unit quotient; then check all other coordinates at stored precision
    if (v[piv].valuation() != best) return false;
    const auto& ctx = v[0].ctx;
    UnramElem w = v[piv].div_pk(best) * vp[piv].div_pk(best).invert();
    if (piv % 2 == 1) w = w.invert();  // solved for w^{-1}
    for (int j = 0; j < a; ++j) {
        UnramElem rhs = (j % 2 == 0) ? w * vp[j] : w.invert() * vp[j];
        if (!eq(v[j], rhs)) return false;
    }
    return true;
}

}  // namespace wachlab
