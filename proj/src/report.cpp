#include "deltasa/report.hpp"

#include <cmath>

namespace deltasa {
namespace {

json checkpoints(const std::vector<Checkpoint>& cps) {
  json out = json::array();
  for (const auto& c : cps) out.push_back({{"horizon", c.horizon}, {"partial_sum", number(c.partial_sum)}});
  return out;
}

json windows(const std::vector<WindowSup>& ws) {
  json out = json::array();
  for (const auto& w : ws) out.push_back(to_json(w));
  return out;
}

json complex_json(cplx z) { return json::array({number(z.real()), number(z.imag())}); }

}  // namespace

json number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return x;
}

json to_json(const WindowSup& w) {
  return {{"lo", w.lo}, {"hi", w.hi}, {"sup", number(w.sup)}, {"argmax", w.argmax}, {"noise", number(w.noise)}};
}

json to_json(const GrowthFit& g) {
  return {{"kind", g.kind}, {"block_ratio", number(g.block_ratio)}, {"exponent", number(g.exponent)}};
}

json to_json(const Summability& s) {
  return {{"in_ell1", to_string(s.in_ell1)}, {"in_ell2", to_string(s.in_ell2)}, {"basis", s.basis}};
}

json to_json(const RatioStats& r) {
  return {{"window", {r.window_lo, r.window_hi}},
          {"min_tail_ratio", number(r.min_tail_ratio)},
          {"max_tail_ratio", number(r.max_tail_ratio)},
          {"limit_estimate", number(r.limit_estimate)},
          {"tolerance", number(r.tolerance)},
          {"limit_exists", r.limit_exists}};
}

json to_json(const SeriesProbe& p) {
  json params = {{"basis", p.basis}};
  if (p.term_order) params["term_order"] = {{"n_pow", p.term_order->first}, {"ln_pow", p.term_order->second}};
  json witnesses = {{"fitted_growth", to_json(p.fitted_growth)}, {"gate_failed", p.gate_failed}};
  if (!p.note.empty()) witnesses["note"] = p.note;
  return {{"test", p.test},
          {"params", params},
          {"checkpoints", checkpoints(p.checkpoints)},
          {"verdict", to_string(p.verdict)},
          {"witnesses", witnesses}};
}

json to_json(const BoundProbe& p) {
  return {{"test", p.test},
          {"params", {{"G", p.g_kind}}},
          {"checkpoints", json::array()},
          {"verdict", to_string(p.holds)},
          {"witnesses",
           {{"minimal_constant", number(p.minimal_constant)},
            {"argmax", p.argmax},
            {"trend", p.trend},
            {"windows", windows(p.windows)}}}};
}

json to_json(const ConditionB& b) {
  return {{"test", "condition_B"},
          {"params", json::object()},
          {"checkpoints", json::array()},
          {"verdict", to_string(b.holds)},
          {"witnesses",
           {{"u_odd", number(b.u.u_odd)},
            {"u_even", number(b.u.u_even)},
            {"product", number(b.product)},
            {"residual_order", number(b.residual_order)},
            {"residual_constant", number(b.residual_constant)},
            {"windows", windows(b.windows)},
            {"note", b.note}}}};
}

json to_json(const FloquetResult& f) {
  return {{"test", "floquet"},
          {"params", {{"a", number(f.a)}, {"lambda", number(f.lambda)}}},
          {"checkpoints", json::array()},
          {"verdict", std::abs(f.discriminant) < 1.0 ? "band" : "gap_or_edge"},
          {"witnesses",
           {{"u_odd", number(f.u.u_odd)}, {"u_even", number(f.u.u_even)}, {"discriminant", number(f.discriminant)}}}};
}

json to_json(const OracleRun& run) {
  json norms = json::array();
  for (double x : run.l2.log_block_norms) norms.push_back(number(x));
  return {{"test", "oracle"},
          {"params", {{"lambda", complex_json(run.lambda)}}},
          {"checkpoints", json::array()},
          {"verdict", to_string(run.l2.verdict)},
          {"witnesses",
           {{"decay_ratio", number(run.l2.decay_ratio)},
            {"blocks_used", run.l2.blocks_used},
            {"log_block_mass", norms},
            {"max_row_residual", number(run.residual.max)},
            {"residual_argmax", run.residual.argmax}}}};
}

json to_json(const CriterionVerdict& v, bool with_timings) {
  json out = {{"verdict", to_string(v.verdict)},
              {"certifying_test", v.certifying_test},
              {"advisory", v.advisory},
              {"reason", v.reason}};
  if (v.verdict == Verdict::Deficient) out["deficiency_indices"] = 1;
  if (v.verdict == Verdict::SelfAdjoint) out["deficiency_indices"] = 0;
  json grid = {{"summability", to_json(v.summability)}};
  if (v.ratio) grid["ratio"] = to_json(*v.ratio);
  out["grid"] = grid;

  json probes = json::array();
  for (const auto* p : {&v.offdiagonal, &v.carleman, &v.cubic, &v.condition_A})
    if (*p) probes.push_back(to_json(**p));
  for (const auto* p : {&v.upper, &v.lower})
    if (*p) probes.push_back(to_json(**p));
  if (v.condition_B) probes.push_back(to_json(*v.condition_B));
  if (v.floquet) probes.push_back(to_json(*v.floquet));
  for (const auto& run : v.oracle) probes.push_back(to_json(run));
  out["probes"] = probes;
  if (v.g_kind) out["G"] = *v.g_kind;
  if (v.oracle_verdict) out["oracle_verdict"] = to_string(*v.oracle_verdict);
  out["notes"] = v.notes;
  if (with_timings) {
    json t = json::array();
    for (const auto& s : v.timings) t.push_back({{"stage", s.stage}, {"seconds", s.seconds}});
    out["timings"] = t;
  }
  return out;
}

}  // namespace deltasa
