#pragma once

// JSON (de)serialization of the public types.  Residues are emitted as
// numbers when they fit in 53 bits and as decimal strings otherwise, so
// transcripts stay byte-identical across platforms.

#include "wachlab/reduction.hpp"

#include <json.hpp>

namespace wachlab {

using json = nlohmann::ordered_json;

inline json big_to_json(const BigInt& x) {
    if (x >= 0 && x <= BigInt(9007199254740992LL)) return (long long)x;
    return x.str();
}

inline BigInt big_from_json(const json& j) {
    if (j.is_number_unsigned() || j.is_number_integer()) return BigInt(j.get<long long>());
    if (j.is_string()) return BigInt(j.get<std::string>());
    throw input_error("expected integer or decimal string");
}

inline json elem_to_json(const UnramElem& e) {
    json arr = json::array();
    for (const auto& c : e.c) arr.push_back(big_to_json(c));
    return arr;
}

inline UnramElem elem_from_json(const FieldCtxPtr& ctx, const json& j) {
    if (!j.is_array() || (int)j.size() != ctx->f) throw input_error("element: expected array of f residues");
    std::vector<BigInt> c;
    for (const auto& x : j) c.push_back(big_from_json(x));
    return ctx->from_coeffs(std::move(c));
}

inline json ctx_to_json(const FieldCtxPtr& ctx) {
    json j;
    j["p"] = ctx->p;
    j["a"] = ctx->a;
    j["f"] = ctx->f;
    j["N"] = ctx->N;
    json mod = json::array();
    for (const auto& c : ctx->modulus) mod.push_back(big_to_json(c));
    j["modulus"] = mod;
    return j;
}

inline FieldCtxPtr ctx_from_json(const json& j) {
    if (!j.contains("p") || !j.contains("a") || !j.contains("f") || !j.contains("N"))
        throw input_error("ctx: need p, a, f, N");
    auto ctx = make_field(j["p"].get<long long>(), j["a"].get<int>(), j["f"].get<int>(), j["N"].get<int>());
    if (j.contains("modulus")) {
        if ((int)j["modulus"].size() != ctx->f) throw input_error("ctx: modulus degree != f");
        for (int i = 0; i < ctx->f; ++i)
            if (mod_reduce(big_from_json(j["modulus"][i]) - ctx->modulus[i], BigInt(ctx->p)) != 0)
                throw input_error("ctx: modulus does not match the deterministic choice mod p");
    }
    return ctx;
}

inline json series_to_json(const TruncSeries& s) {
    json arr = json::array();
    for (const auto& e : s.a) arr.push_back(elem_to_json(e));
    return arr;
}

inline TruncSeries series_from_json(const FieldCtxPtr& ctx, const json& j) {
    if (!j.is_array() || j.empty()) throw input_error("series: expected non-empty array");
    std::vector<UnramElem> c;
    for (const auto& x : j) c.push_back(elem_from_json(ctx, x));
    return TruncSeries(ctx, (int)c.size(), std::move(c));
}

inline json scaled_to_json(const ScaledSeries& s) {
    json j;
    j["denom_exp"] = s.denom_exp;
    j["body"] = series_to_json(s.body);
    return j;
}

inline json polygon_to_json(const Polygon& poly) {
    json arr = json::array();
    for (const auto& s : poly.slopes) {
        json e;
        e["slope"] = json::array({s.first.num, s.first.den});
        e["mult"] = s.second;
        arr.push_back(e);
    }
    return arr;
}

inline json mat_to_json(const Mat<UnramElem>& m) {
    json rows = json::array();
    for (int i = 0; i < m.rows; ++i) {
        json row = json::array();
        for (int j = 0; j < m.cols; ++j) row.push_back(elem_to_json(m.at(i, j)));
        rows.push_back(row);
    }
    return rows;
}

inline Mat<UnramElem> mat_from_json(const FieldCtxPtr& ctx, const json& j) {
    if (!j.is_array() || j.empty()) throw input_error("matrix: expected array of rows");
    int rows = (int)j.size(), cols = (int)j[0].size();
    Mat<UnramElem> m(rows, cols, ctx->zero());
    for (int i = 0; i < rows; ++i) {
        if ((int)j[i].size() != cols) throw input_error("matrix: ragged rows");
        for (int c = 0; c < cols; ++c) m.at(i, c) = elem_from_json(ctx, j[i][c]);
    }
    return m;
}

inline json smat_to_json(const SeriesMat& m) {
    json rows = json::array();
    for (int i = 0; i < m.rows; ++i) {
        json row = json::array();
        for (int j = 0; j < m.cols; ++j) row.push_back(series_to_json(m.at(i, j)));
        rows.push_back(row);
    }
    return rows;
}

inline json spec_to_json(const RepSpec& s) {
    json j;
    j["ctx"] = ctx_to_json(s.ctx);
    j["d"] = s.d;
    j["k"] = s.k.k;
    json A = json::array();
    for (const auto& m : s.A) A.push_back(mat_to_json(m));
    j["A"] = A;
    return j;
}

inline RepSpec spec_from_json(const json& j, std::optional<FieldCtxPtr> override_ctx = std::nullopt) {
    RepSpec s;
    s.ctx = override_ctx ? *override_ctx : ctx_from_json(j.at("ctx"));
    s.d = j.at("d").get<int>();
    for (const auto& row : j.at("k")) s.k.k.push_back(row.get<std::vector<long long>>());
    for (const auto& m : j.at("A")) s.A.push_back(mat_from_json(s.ctx, m));
    s.validate();
    return s;
}

inline json verdict_to_json(const IrredVerdict& v) {
    json j;
    j["verdict"] = v.reducible ? "reducible" : "irreducible";
    j["criteria"] = {{"slopes", v.criterion_slopes}, {"trace", v.criterion_trace}};
    j["slopes"] = polygon_to_json(v.np);
    j["subset_sums"] = v.subset_sums;
    if (v.witness) {
        json w;
        w["J"] = v.witness->J;
        json ws = json::array(), xy = json::array();
        for (const auto& e : v.witness->w) ws.push_back(elem_to_json(e));
        for (const auto& e : v.witness->xy) xy.push_back(json::array({elem_to_json(e.first), elem_to_json(e.second)}));
        w["w"] = ws;
        w["xy"] = xy;
        j["witness"] = w;
    } else if (!v.witness_note.empty()) {
        j["witness"] = nullptr;
        j["witness_note"] = v.witness_note;
    }
    return j;
}

inline json label_to_json(const ReductionLabel& L) {
    json j;
    switch (L.kind) {
        case ReductionLabel::Kind::Reducible:
            j["kind"] = "reducible";
            j["subs"] = json::array({L.sub1, L.sub2});
            break;
        case ReductionLabel::Kind::Irreducible:
            j["kind"] = "irreducible";
            break;
        default:
            j["kind"] = "unknown";
    }
    j["h"] = L.h;
    j["certificate"] = L.certificate;
    if (!L.omega.empty()) j["omega"] = L.omega;
    return j;
}

inline FamilySpec family_from_json(const json& j, const FieldCtxPtr& ctx) {
    FamilySpec fs;
    fs.ctx = ctx;
    fs.k = j.at("k").get<std::vector<long long>>();
    for (const auto& t : j.at("partition")) {
        std::string s = t.get<std::string>();
        if (s == "A" || s == "a")
            fs.partition.push_back(Part::A);
        else if (s == "B" || s == "b")
            fs.partition.push_back(Part::B);
        else
            throw input_error("family: partition entries must be \"A\" or \"B\"");
    }
    auto get_vec = [&](const char* key, bool unit_default) {
        std::vector<UnramElem> out;
        if (!j.contains(key)) {
            for (int i = 0; i < (int)fs.k.size(); ++i) out.push_back(unit_default ? ctx->one() : ctx->zero());
            return out;
        }
        for (const auto& x : j.at(key)) {
            if (x.is_array())
                out.push_back(elem_from_json(ctx, x));
            else
                out.push_back(ctx->from_scalar(big_from_json(x)));
        }
        return out;
    };
    fs.v = get_vec("v", false);
    fs.u = get_vec("u", true);
    fs.validate();
    return fs;
}

inline json family_to_json(const FamilySpec& fs) {
    json j;
    j["ctx"] = ctx_to_json(fs.ctx);
    j["k"] = fs.k;
    json part = json::array();
    for (auto t : fs.partition) part.push_back(t == Part::A ? "A" : "B");
    j["partition"] = part;
    json v = json::array(), u = json::array();
    for (const auto& e : fs.v) v.push_back(elem_to_json(e));
    for (const auto& e : fs.u) u.push_back(elem_to_json(e));
    j["v"] = v;
    j["u"] = u;
    return j;
}

inline json wach_to_json(const WachModule& W) {
    json j;
    j["N"] = W.ctx->N;
    j["M"] = W.M;
    j["d"] = W.d;
    j["k"] = W.k.k;
    j["gamma_c"] = big_to_json(mod_reduce(W.gamma.c, W.ctx->pN));
    json P = json::array(), G = json::array();
    for (const auto& m : W.Phat) P.push_back(smat_to_json(m));
    for (const auto& m : W.Ghat) G.push_back(smat_to_json(m));
    j["Phat"] = P;
    j["Ghat"] = G;
    j["residual_report"] = {{"commutation_ord", W.residual_ord},
                            {"cocycle_ord", W.cocycle_ord},
                            {"certified_mod", "p^" + std::to_string(std::min(W.residual_ord, W.ctx->N))}};
    if (!W.flags.empty()) j["flags"] = W.flags;
    return j;
}

}  // namespace wachlab
