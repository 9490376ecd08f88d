#include "frostlab/io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace frostlab {

namespace {

Json PlateJson(const Plate& p) {
  return {{"rows", p.plane.rows}, {"d", p.plane.d}, {"base", p.base}, {"width", p.width}};
}

Json SetCells(const DyadicSet& s) {
  Json cells = Json::array();
  for (std::size_t i = 0; i < s.size(); ++i) cells.push_back(s.cell(i).coords);
  return cells;
}

}  // namespace

Json MeasureToJson(const DyadicMeasure& mu) {
  Json cells = Json::array();
  for (std::size_t i = 0; i < mu.size(); ++i)
    cells.push_back({{"idx", mu.cell(i).coords}, {"mass", mu.mass(i)}});
  return {{"d", mu.dim()}, {"m", mu.depth()}, {"cells", cells}};
}

DyadicMeasure MeasureFromJson(const Json& j) {
  try {
    const int d = j.at("d").get<int>();
    const int m = j.at("m").get<int>();
    CheckShape(d, m);
    std::vector<Cell<double>> cells;
    for (const auto& c : j.at("cells")) {
      auto idx = c.at("idx").get<std::vector<std::uint32_t>>();
      const double w = c.at("mass").get<double>();
      Require(static_cast<int>(idx.size()) == d, ErrorCode::kParseError,
              "cell index has the wrong dimension");
      Require(std::isfinite(w) && w >= 0, ErrorCode::kParseError, "bad cell mass");
      for (auto x : idx)
        Require(m >= 32 || x < (std::uint32_t{1} << m), ErrorCode::kParseError,
                "cell index out of range");
      cells.push_back({EncodeKey(idx, m), w});
    }
    return DyadicMeasure(d, m, std::move(cells));
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorCode::kParseError, std::string("measure: ") + e.what());
  }
}

Json PLFunctionToJson(const PLFunction& f) {
  return {{"a", f.a()}, {"b", f.b()}, {"G", f.grid()}, {"values", f.values()}};
}

PLFunction PLFunctionFromJson(const Json& j) {
  try {
    auto v = j.at("values").get<std::vector<double>>();
    Require(v.size() >= 2, ErrorCode::kParseError, "need at least two values");
    if (j.contains("G"))
      Require(j.at("G").get<int>() + 1 == static_cast<int>(v.size()), ErrorCode::kParseError,
              "G does not match the number of values");
    return PLFunction(j.value("a", 0.0), j.value("b", 1.0), std::move(v));
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorCode::kParseError, std::string("PL function: ") + e.what());
  }
}

Json ToJson(const IntervalDecomposition& dec) {
  Json iv = Json::array();
  for (const auto& i : dec.intervals)
    iv.push_back({{"lo", i.lo}, {"hi", i.hi}, {"slope", i.slope}});
  return {{"kind", dec.kind == DecompositionKind::kLinear ? "linear" : "superlinear"},
          {"lo", dec.lo},
          {"hi", dec.hi},
          {"eps", dec.eps},
          {"tau", dec.tau},
          {"generations", dec.generations},
          {"covered", dec.covered()},
          {"leftover", dec.leftover()},
          {"intervals", iv},
          {"warnings", dec.warnings}};
}

Json ToJson(const SuperlinearResult& r) {
  Json j = ToJson(r.dec);
  j["s"] = r.s;
  j["t"] = r.t;
  j["sigma"] = r.sigma;
  j["sigma_eff"] = r.sigma_eff;
  j["zeta"] = r.zeta;
  j["eps_requested"] = r.eps;
  j["eps0"] = r.eps0;
  j["eps1"] = r.eps1;
  j["xi"] = r.xi;
  j["early_exit"] = r.early_exit;
  if (r.bridge)
    j["bridge"] = {{"lo", r.bridge->lo}, {"hi", r.bridge->hi}, {"slope", r.bridge->slope}};
  Json blocks = Json::array();
  for (const auto& b : r.blocks) blocks.push_back({{"lo", b.lo}, {"hi", b.hi}, {"class", b.cls}});
  j["blocks"] = blocks;
  return j;
}

Json ToJson(const RegularDecomposition& dec, bool with_cells) {
  auto piece = [&](const RegularPiece& p) {
    Json j = {{"sigma", p.sigma},
              {"T", p.T},
              {"mass", p.mass},
              {"beta", p.sigma.empty() ? 0.0 : Beta(p.sigma)},
              {"cells", p.support.size()}};
    if (with_cells) j["support"] = SetCells(p.support);
    return j;
  };
  Json pieces = Json::array(), residual = Json::array();
  for (const auto& p : dec.pieces) pieces.push_back(piece(p));
  for (const auto& p : dec.residual) residual.push_back(piece(p));
  return {{"eps", dec.eps},
          {"delta", dec.delta},
          {"union_mass", dec.union_mass},
          {"remainder_mass", dec.remainder_mass},
          {"pieces", pieces},
          {"residual", residual},
          {"warnings", dec.warnings}};
}

Json ToJson(const ScaleDecomposition& dec) {
  Json iv = Json::array();
  for (const auto& s : dec.intervals)
    iv.push_back({{"A", s.A},
                  {"B", s.B},
                  {"alpha", s.alpha},
                  {"m", dec.m(s)},
                  {"mid", s.alpha >= dec.xi && s.alpha <= dec.d - dec.xi}});
  return {{"d", dec.d},     {"T", dec.T},       {"ell", dec.ell}, {"ahlfors", dec.ahlfors},
          {"eps", dec.eps}, {"xi", dec.xi},     {"tau", dec.tau}, {"s", dec.s},
          {"t", dec.t},     {"eps_lip", dec.eps_lip}, {"intervals", iv},
          {"warnings", dec.warnings}};
}

Json ToJson(const VerificationReport& rep) {
  Json scales = Json::array();
  for (const auto& s : rep.scales)
    scales.push_back({{"A", s.A},
                      {"B", s.B},
                      {"alpha", s.alpha},
                      {"m", s.m},
                      {"cubes_total", s.cubes_total},
                      {"cubes_checked", s.cubes_checked},
                      {"probes", s.probes},
                      {"max_excess", s.max_excess},
                      {"min_excess", s.min_excess}});
  return {{"ok", rep.ok()},
          {"two_sided", rep.two_sided},
          {"i", rep.i_ok},
          {"ii", rep.ii_ok},
          {"iii", rep.iii_ok},
          {"iv", rep.iv_ok},
          {"gaps", rep.gaps_ok},
          {"sum_alpha_m", rep.sum_alpha_m},
          {"iii_target", rep.iii_target},
          {"iv_mass", rep.iv_mass},
          {"iv_target", rep.iv_target},
          {"gap_blocks", rep.gap_blocks},
          {"gap_bound", rep.gap_bound},
          {"eps_needed", rep.eps_needed},
          {"nonconcentration",
           {{"radius", rep.eq41.radius},
            {"max_mass", rep.eq41.max_mass},
            {"bound", rep.eq41.bound},
            {"ok", rep.eq41.ok}}},
          {"scales", scales},
          {"failures", rep.failures}};
}

Json ToJson(const MultiscaleResult& r) {
  return {{"decomposition", ToJson(r.dec)}, {"report", ToJson(r.report)}};
}

Json ToJson(const EntropyBound& b) {
  return {{"lhs", b.lhs},         {"rhs", b.rhs},   {"rhs_joint", b.rhs_joint},
          {"deficit", b.deficit}, {"terms", b.terms}, {"q", b.q}};
}

Json ToJson(const Energy& e) {
  return {{"total", e.total},
          {"self", e.self},
          {"off", e.off},
          {"level", e.level},
          {"approximate", e.approximate}};
}

Json ToJson(const DecayFit& f) {
  return {{"r", f.r}, {"sup_net", f.sup_net}, {"sup_upper", f.sup_upper}, {"kappa", f.kappa}};
}

Json ToJson(const KaufmanReport& r) {
  return {{"lhs", r.lhs},         {"rhs", r.rhs},       {"lhs_off", r.lhs_off},
          {"rhs_off", r.rhs_off}, {"factor", r.factor}, {"pass", r.pass}};
}

Json ToJson(const FalconerReport& r) {
  return {{"levels", r.levels},
          {"lhs", r.lhs},
          {"rhs", r.rhs},
          {"ratio", r.ratio},
          {"energy_levels", r.energy_levels},
          {"exact", r.exact},
          {"non_increasing", r.non_increasing}};
}

Json ToJson(const HeavyStructure& h) {
  Json Y = Json::array(), T = Json::array(), steps = Json::array();
  for (const auto& y : h.Y) Y.push_back({{"a", y.a}, {"j", y.j}, {"mass", y.mass}});
  for (const auto& t : h.T) T.push_back(PlateJson(t));
  for (const auto& s : h.steps)
    steps.push_back({{"m", s.m}, {"S", s.S}, {"sum_sq", s.sum_sq}, {"ok", s.ok}});
  return {{"delta", h.delta},
          {"eta", h.eta},
          {"kappa", h.kappa},
          {"C_nu", h.C_nu},
          {"C_eff", h.C_eff},
          {"threshold", h.threshold},
          {"overlap", h.overlap},
          {"sin_bound", h.sin_bound},
          {"t_width", h.t_width},
          {"m_bound", h.m_bound},
          {"M", h.M()},
          {"heavy_candidates", h.heavy_candidates},
          {"uncontained", h.uncontained},
          {"steps_ok", h.steps_ok},
          {"ok", h.ok()},
          {"Y", Y},
          {"T", T},
          {"steps", steps}};
}

Json ToJson(const RadialReport& r) {
  Json stages = Json::array();
  for (const auto& s : r.stages) {
    Json j = {{"n", s.n},
              {"delta", s.delta},
              {"C_nu", s.C_nu},
              {"M", s.M},
              {"structure_ok", s.structure_ok},
              {"mu_E", s.mu_E},
              {"bad", s.bad},
              {"badbad", s.badbad},
              {"pruned", s.pruned},
              {"nu_loss", s.nu_loss},
              {"mu_next", s.mu_next}};
    if (s.P) j["P"] = PlateJson(*s.P);
    stages.push_back(j);
  }
  return {{"stages", stages},
          {"L_cells", r.L.size()},
          {"K_cells", r.K.size()},
          {"mu_L", r.mu_L},
          {"nu_K", r.nu_K},
          {"loss_sum", r.loss_sum},
          {"mu_exponent", r.mu_exponent},
          {"nu_exponent", r.nu_exponent},
          {"budget_ok", r.budget_ok},
          {"concentration", r.concentration},
          {"degenerate", r.degenerate},
          {"r", r.r},
          {"sup", r.sup},
          {"fitted", r.fitted},
          {"flags", r.flags}};
}

Json ToJson(const FamilyBounds& b) {
  return {{"grad_min", b.grad_min}, {"turn_min", b.turn_min}, {"c2_norm", b.c2_norm},
          {"slope", b.slope},       {"c", b.c},               {"samples", b.samples}};
}

Json ToJson(const IncidenceResult& r) {
  return {{"count", r.count}, {"E", r.E},         {"A", r.A},
          {"X", r.X},         {"delta", r.delta}, {"slope", r.slope},
          {"width", r.width}, {"multiplicity", r.multiplicity}, {"ratio", r.ratio}};
}

Json ToJson(const AuditReport& r) {
  Json rows = Json::array();
  for (const auto& x : r.x_rows)
    rows.push_back({{"r", x.r}, {"max", x.max}, {"bound", x.bound}, {"witness", x.witness}});
  return {{"delta", r.delta},
          {"kappa", r.kappa},
          {"eps", r.eps},
          {"size", {{"lhs", r.size_lhs}, {"rhs", r.size_rhs}, {"ok", r.size_ok}}},
          {"A_ball",
           {{"radius", r.a_radius},
            {"max", r.a_max},
            {"bound", r.a_bound},
            {"witness", r.a_witness},
            {"centers", r.a_centers},
            {"max_double_radius", r.a_max_double},
            {"ok", r.a_ok}}},
          {"X_ball", {{"rows", rows}, {"ok", r.x_ok}}},
          {"ok", r.ok()}};
}

Json ToJson(const Quantiles& q) {
  return {{"min", q.min}, {"q25", q.q25}, {"median", q.median}, {"q75", q.q75}, {"max", q.max}};
}

Json ToJson(const Sweep& s) {
  return {{"level", s.level},
          {"directions", s.rows.size()},
          {"exponent", ToJson(s.exponent)},
          {"slope", ToJson(s.slope)}};
}

Json ToJson(const PinSweep& s) {
  std::size_t inside = 0;
  for (const auto& r : s.rows) inside += r.in_support;
  return {{"level", s.level},
          {"pins", s.rows.size()},
          {"pins_in_support", inside},
          {"exponent", ToJson(s.exponent)}};
}

Json ParseJson(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    Fail(ErrorCode::kParseError, e.what());
  }
}

std::string ReadTextFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  Require(in.good(), ErrorCode::kIoError, "cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void WriteTextFile(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  Require(out.good(), ErrorCode::kIoError, "cannot write " + path);
  out << text;
  Require(out.good(), ErrorCode::kIoError, "write failed for " + path);
}

}  // namespace frostlab
