#include "app.hpp"

#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <exception>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#ifndef PAPM_VERSION
#define PAPM_VERSION "0.0.0"
#endif

namespace papm::app {

namespace {

constexpr int kMaxHalfDimension = 8;
constexpr int kMaxSweepSteps = 101;
/// Sweep cells with |Delta| at most this are reported but not judged.
constexpr double kConicBand = 1e-9;
/// Corollary-level identities compare contracted curvature; they get one
/// decade of slack over the curvature tolerance.
constexpr double kContractionSlack = 10.0;

const std::vector<std::string> kIdentities{"eq12", "eq19", "eq21", "cor32", "eq26p", "naturality"};

template <class T, class F>
std::vector<T> ordered_parallel_map(size_t count, const F& fn) {
  std::vector<std::optional<T>> slots(count);
  std::vector<std::exception_ptr> errors(count);
  std::atomic<size_t> next{0};
  const auto worker = [&] {
    for (size_t i = next++; i < count; i = next++) {
      try {
        slots[i].emplace(fn(i));
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const size_t hw = std::max(1u, std::thread::hardware_concurrency());
  const size_t n_threads = std::min(count, hw);
  {
    std::vector<std::jthread> pool;
    for (size_t k = 1; k < n_threads; ++k) pool.emplace_back(worker);
    worker();
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  std::vector<T> out;
  out.reserve(count);
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

Json to_json(const Eigen::VectorXd& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

Json to_json(const ClassFlags& f) {
  return {{"is_W0", f.is_W0},
          {"in_W3bar", f.in_W3bar},
          {"in_W6bar", f.in_W6bar},
          {"theta_parity", to_string(f.theta_parity)},
          {"shape_residual", f.shape_residual}};
}

Json to_json(const ClosednessEvidence& e) {
  return {{"theta_closed", e.theta_closed},
          {"theta_P_closed", e.theta_P_closed},
          {"residual_theta", e.residual_theta},
          {"residual_theta_P", e.residual_theta_P},
          {"tolerance", e.tolerance}};
}

Json to_json(const CurvatureIdentityResiduals& r, double tol) {
  return {{"antisym_first", r.antisym_first},
          {"antisym_second", r.antisym_second},
          {"bianchi", r.bianchi},
          {"p_invariance", r.p_invariance},
          {"residual", r.p_tensor()},
          {"tolerance", tol},
          {"is_P_tensor", r.p_tensor() <= tol}};
}

Json to_json(const ConnectionParams& cp, int n) {
  return {{"lambda", cp.lambda}, {"mu", cp.mu}, {"delta", discriminant(cp, n)}};
}

Json violation_json(const std::string& check, double residual, const std::string& message) {
  return {{"check", check}, {"residual", residual}, {"message", message}};
}

std::string utc_timestamp() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void require_positive(double v, const std::string& name) {
  if (!(std::isfinite(v) && v > 0.0)) throw InputError(name + " must be a positive finite number");
}

struct Context {
  LoadedSpec spec;
  ChartManifold M;
  Tolerances tol;
};

Context make_context(const Options& o) {
  require_positive(o.tol.curvature, "--tol-curvature");
  require_positive(o.tol.derivative, "--tol-derivative");
  require_positive(o.tol.structure, "--tol-structure");
  Context ctx{load_spec(o.spec_path, resolve_seed()), {}, o.tol};
  if (o.fd_step) ctx.spec.fd_step = *o.fd_step;
  if (!(ctx.spec.fd_step >= kMinFdStep && ctx.spec.fd_step <= kMaxFdStep)) {
    std::ostringstream os;
    os << "fd_step must lie in [" << kMinFdStep << ", " << kMaxFdStep << "]";
    throw InputError(os.str());
  }
  ctx.M = make_manifold(ctx.spec.field, ctx.spec.fd_step);
  return ctx;
}

Json report_header(const std::string& command, const Context& ctx) {
  Json r;
  r["schema"] = "papm-report";
  r["schema_version"] = kSchemaVersion;
  r["tool"] = {{"name", "papm"}, {"version", PAPM_VERSION}};
  r["command"] = command;
  r["spec"] = ctx.spec.echo;
  r["seed"] = ctx.spec.seed;
  r["points_source"] = ctx.spec.points_from_spec ? "spec" : "seeded";
  r["settings"] = {{"fd_step", ctx.M.fd_step},
                   {"curvature_step", ctx.M.curvature_step},
                   {"tolerances",
                    {{"structure", ctx.tol.structure},
                     {"derivative", ctx.tol.derivative},
                     {"curvature", ctx.tol.curvature}}}};
  return r;
}

int finish(Json& report, bool pass, const std::string& message, std::ostream& out) {
  const int code = pass ? kExitOk : kExitViolation;
  report["summary"] = {{"status", pass ? "pass" : "fail"}, {"exit_code", code}, {"message", message}};
  report["timestamp"] = utc_timestamp();
  out << report.dump(2) << '\n';
  return code;
}

/// Structure, W1 membership, class flags and closedness at one sample point.
struct PointEval {
  Json record;
  std::optional<ChartPoint> chart_point;
  ClassFlags flags;
  ClosednessEvidence evidence;
  bool ok() const { return chart_point.has_value(); }
};

PointEval evaluate_point(const Context& ctx, size_t index) {
  const ChartManifold& M = ctx.M;
  const Coordinates& u = ctx.spec.points[index];
  PointEval pe;
  pe.record["index"] = index;
  pe.record["coordinates"] = to_json(u);
  Json violations = Json::array();
  const StructuredPoint raw{M.n, M.metric_field(u), M.P_field(u), Covector::Zero(M.dim())};
  for (const auto& v : validate(raw, ctx.tol.structure)) violations.push_back(violation_json(v.check, v.residual, v.message));
  if (violations.empty()) {
    try {
      ChartPoint cp = point_of(M, u, std::numeric_limits<double>::infinity(), ctx.tol.structure);
      const bool w1 = cp.w1_residual <= ctx.tol.structure;
      pe.record["w1"] = {{"residual", cp.w1_residual}, {"tolerance", ctx.tol.structure}, {"pass", w1}};
      if (!w1) violations.push_back(violation_json("w1", cp.w1_residual, "F does not have the W1 shape"));
      pe.flags = class_flags(cp.point, ctx.tol.structure);
      pe.evidence = evidence_from(nabla_theta(M, u, levi_civita_field(M), ctx.tol.derivative));
      pe.record["theta"] = to_json(cp.point.theta);
      pe.record["class_flags"] = to_json(pe.flags);
      pe.record["closedness"] = to_json(pe.evidence);
      if (w1) pe.chart_point = std::move(cp);
    } catch (const GeometryError& e) {
      violations.push_back(violation_json(e.check(), std::numeric_limits<double>::quiet_NaN(), e.what()));
    }
  }
  pe.record["valid"] = violations.empty();
  pe.record["violations"] = violations;
  return pe;
}

std::vector<PointEval> evaluate_points(const Context& ctx) {
  return ordered_parallel_map<PointEval>(ctx.spec.points.size(), [&](size_t i) { return evaluate_point(ctx, i); });
}

bool all_ok(const std::vector<PointEval>& pts) {
  return std::all_of(pts.begin(), pts.end(), [](const PointEval& p) { return p.ok(); });
}

Json point_records(const std::vector<PointEval>& pts) {
  Json a = Json::array();
  for (const auto& p : pts) a.push_back(p.record);
  return a;
}

ClosednessEvidence aggregate_evidence(const std::vector<PointEval>& pts) {
  std::vector<ClosednessEvidence> ev;
  for (const auto& p : pts) ev.push_back(p.evidence);
  return aggregate(ev);
}

bool all_pure_parity(const std::vector<PointEval>& pts) {
  return std::all_of(pts.begin(), pts.end(), [](const PointEval& p) {
    return p.flags.is_W0 || p.flags.in_W3bar || p.flags.in_W6bar;
  });
}

ConnectionParams resolve_connection(const ClassifyOptions& c, int n, bool allow_default, Json& echo) {
  if (c.named) {
    if (c.lambda || c.mu) throw InputError("--named cannot be combined with --lambda/--mu");
    const auto nc = parse_named_connection(*c.named);
    if (!nc) throw InputError("unknown named connection '" + *c.named + "' (expected D, Dtilde or canonical)");
    echo["named"] = to_string(*nc);
    return params_of(*nc, n);
  }
  if (c.lambda.has_value() != c.mu.has_value()) throw InputError("--lambda and --mu must be given together");
  if (c.lambda) {
    if (!std::isfinite(*c.lambda) || !std::isfinite(*c.mu)) throw InputError("--lambda and --mu must be finite");
    return {*c.lambda, *c.mu};
  }
  if (!allow_default) throw InputError("give either --named or both --lambda and --mu");
  echo["named"] = "D";
  return params_of(NamedConnection::D, n);
}

struct IdentityResult {
  Json residuals;
  double residual = 0.0;
  double tolerance = 0.0;
};

IdentityResult run_identity(const std::string& id, const Context& ctx, const Coordinates& u, const ConnectionParams& cp) {
  const ChartManifold& M = ctx.M;
  IdentityResult r;
  if (id == "eq12") {
    r.residual = verify_identity12(M, u, cp);
    r.tolerance = ctx.tol.curvature;
    r.residuals = {{"curvature_relation", r.residual}};
  } else if (id == "eq19") {
    r.residual = verify_identity19(M, u, cp);
    r.tolerance = ctx.tol.derivative;
    r.residuals = {{"nabla_prime_Q", r.residual}};
  } else if (id == "eq21") {
    r.residual = verify_theorem31(M, u, cp);
    r.tolerance = ctx.tol.curvature;
    r.residuals = {{"curvature_decomposition", r.residual}};
  } else if (id == "cor32") {
    const Cor32Residuals c = verify_cor32(M, u, cp);
    r.residual = std::max(c.ricci_residual, c.tau_residual);
    r.tolerance = kContractionSlack * ctx.tol.curvature;
    r.residuals = {{"ricci", c.ricci_residual}, {"tau", c.tau_residual},     {"delta_tau", c.delta_tau},
                   {"g_pp", c.g_pp},            {"g_qq", c.g_qq},            {"trace_S1", c.trace_S1},
                   {"trace_S2", c.trace_S2}};
  } else if (id == "eq26p") {
    r.residual = verify_26prime(M, u, cp);
    r.tolerance = ctx.tol.derivative;
    r.residuals = {{"antisymmetrized_nabla_theta", r.residual}};
  } else {
    const ChartPoint pt = point_of(M, u, std::numeric_limits<double>::infinity(), ctx.tol.structure);
    const Tensor3 Q = q_tensor(pt.point, cp);
    const NaturalityResiduals nr = naturality_residuals(f_tensor(M, u), Q, pt.point.P);
    const double forms = max_abs_diff(Q, q_tensor_expanded(pt.point, cp));
    const ParallelResiduals par = natural_parallel_residuals(M, u, cp);
    r.residual = std::max({nr.F_relation, nr.q_skew, forms, par.metric, par.structure});
    r.tolerance = ctx.tol.derivative;
    r.residuals = {{"F_relation", nr.F_relation},
                   {"Q_skew", nr.q_skew},
                   {"Q_forms", forms},
                   {"nabla_prime_g", par.metric},
                   {"nabla_prime_P", par.structure}};
  }
  r.residuals["residual"] = r.residual;
  r.residuals["tolerance"] = r.tolerance;
  r.residuals["pass"] = r.residual <= r.tolerance;
  return r;
}

double cell_value(double a, double b, int steps, int i) {
  return steps == 1 ? a : a + (b - a) * static_cast<double>(i) / static_cast<double>(steps - 1);
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read spec file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return Json::parse(buf.str());
  } catch (const Json::parse_error& e) {
    throw InputError("malformed JSON in '" + path + "': " + e.what());
  }
}

std::string expression_source(const Json& v, const std::string& where) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number()) return format_number(v.get<double>());
  throw InputError(where + " must be a string expression or a number");
}

dsl::ExprPtr parse_field(const std::string& src, const std::string& where) {
  try {
    return dsl::parse(src);
  } catch (const dsl::ParseError& e) {
    throw InputError(where + ": " + to_string(e.kind()) + " error at " + e.what());
  }
}

double number_at(const Json& v, const std::string& where) {
  if (!v.is_number()) throw InputError(where + " must be a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw InputError(where + " must be finite");
  return x;
}

}  // namespace

std::string format_number(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) return "nan";
  return std::string(buf, ptr);
}

std::pair<double, double> parse_range(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw InputError("range '" + text + "' must have the form A:B");
  const auto parse_one = [&](std::string_view s) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v))
      throw InputError("range '" + text + "' has a malformed bound");
    return v;
  };
  const std::string_view sv(text);
  const double a = parse_one(sv.substr(0, colon));
  const double b = parse_one(sv.substr(colon + 1));
  if (a > b) throw InputError("range '" + text + "' is empty");
  return {a, b};
}

std::uint64_t resolve_seed() {
  const char* env = std::getenv("PAPM_SEED");
  if (!env || !*env) return kDefaultSeed;
  const std::string_view s(env);
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw InputError("PAPM_SEED must be a non-negative integer, got '" + std::string(s) + "'");
  return v;
}

LoadedSpec spec_from_json(const Json& doc, std::uint64_t seed) {
  if (!doc.is_object()) throw InputError("spec must be a JSON object");
  LoadedSpec s;
  s.echo = doc;
  s.seed = seed;
  if (!doc.contains("n") || !doc["n"].is_number_integer()) throw InputError("spec needs an integer 'n'");
  const auto n64 = doc["n"].get<std::int64_t>();
  if (n64 < 1 || n64 > kMaxHalfDimension)
    throw InputError("'n' must lie in [1, " + std::to_string(kMaxHalfDimension) + "]");
  const int n = static_cast<int>(n64), d = 2 * n;
  if (!doc.contains("kind") || !doc["kind"].is_string()) throw InputError("spec needs a string 'kind'");
  const std::string kind = doc["kind"].get<std::string>();

  FieldSpec fs;
  fs.n = n;
  if (kind == "conformal_product") {
    fs.kind = FieldSpec::Kind::conformal_product;
    if (!doc.contains("u")) throw InputError("conformal_product spec needs 'u'");
    fs.u_expr = parse_field(expression_source(doc["u"], "u"), "u");
  } else if (kind == "explicit") {
    fs.kind = FieldSpec::Kind::explicit_entries;
    if (!doc.contains("g") || !doc["g"].is_array()) throw InputError("explicit spec needs a matrix 'g'");
    if (!doc.contains("P") || !doc["P"].is_array()) throw InputError("explicit spec needs a matrix 'P'");
    const Json& g = doc["g"];
    const Json& P = doc["P"];
    if (static_cast<int>(g.size()) != d || static_cast<int>(P.size()) != d)
      throw InputError("'g' and 'P' must have 2n = " + std::to_string(d) + " rows");
    fs.P_entries = Endomorphism(d, d);
    for (int i = 0; i < d; ++i) {
      if (!g[i].is_array() || static_cast<int>(g[i].size()) != d || !P[i].is_array() ||
          static_cast<int>(P[i].size()) != d)
        throw InputError("'g' and 'P' rows must have " + std::to_string(d) + " entries");
      std::vector<dsl::ExprPtr> row;
      for (int j = 0; j < d; ++j) {
        const std::string where = "g[" + std::to_string(i + 1) + "][" + std::to_string(j + 1) + "]";
        row.push_back(parse_field(expression_source(g[i][j], where), where));
        fs.P_entries(i, j) = number_at(P[i][j], "P[" + std::to_string(i + 1) + "][" + std::to_string(j + 1) + "]");
      }
      fs.g_entries.push_back(std::move(row));
    }
  } else {
    throw InputError("unknown kind '" + kind + "' (expected conformal_product or explicit)");
  }
  try {
    check_field_spec(fs);
  } catch (const GeometryError& e) {
    throw InputError(e.what());
  }
  s.field = std::move(fs);

  if (doc.contains("points")) {
    const Json& pts = doc["points"];
    if (!pts.is_array() || pts.empty()) throw InputError("'points' must be a non-empty array");
    for (size_t k = 0; k < pts.size(); ++k) {
      const std::string where = "points[" + std::to_string(k) + "]";
      if (!pts[k].is_array() || static_cast<int>(pts[k].size()) != d)
        throw InputError(where + " must have " + std::to_string(d) + " coordinates");
      Coordinates u(d);
      for (int i = 0; i < d; ++i) u(i) = number_at(pts[k][i], where);
      s.points.push_back(u);
    }
    s.points_from_spec = true;
  } else {
    s.points = sample_points(n, seed, kDefaultSampleCount);
  }
  if (doc.contains("fd_step")) s.fd_step = number_at(doc["fd_step"], "fd_step");
  return s;
}

LoadedSpec load_spec(const std::string& path, std::uint64_t seed) { return spec_from_json(read_json_file(path), seed); }

int cmd_validate(const Options& o, std::ostream& out) {
  const Context ctx = make_context(o);
  const auto pts = evaluate_points(ctx);
  Json report = report_header("validate", ctx);
  report["points"] = point_records(pts);
  const bool pass = all_ok(pts);
  report["aggregate"] = {{"valid_points", std::count_if(pts.begin(), pts.end(), [](const auto& p) { return p.ok(); })},
                         {"total_points", pts.size()},
                         {"closedness", to_json(aggregate_evidence(pts))}};
  return finish(report, pass, pass ? "all sampled points are valid W1 points" : "structure or W1 violation", out);
}

int cmd_classify(const Options& o, const ClassifyOptions& c, std::ostream& out) {
  Context ctx = make_context(o);
  Json report = report_header("classify", ctx);
  Json conn;
  const ConnectionParams cp = resolve_connection(c, ctx.M.n, false, conn);
  conn.update(to_json(cp, ctx.M.n));
  report["connection"] = conn;

  auto pts = evaluate_points(ctx);
  if (!all_ok(pts)) {
    report["points"] = point_records(pts);
    return finish(report, false, "structure or W1 violation at a sample point", out);
  }
  const auto residuals = ordered_parallel_map<CurvatureIdentityResiduals>(pts.size(), [&](size_t i) {
    return curvature_identity_residuals(natural_curvature(ctx.M, ctx.spec.points[i], cp).R,
                                        pts[i].chart_point->point.P);
  });
  bool numeric = true;
  for (size_t i = 0; i < pts.size(); ++i) {
    const bool ok = residuals[i].p_tensor() <= ctx.tol.curvature;
    numeric = numeric && ok;
    pts[i].record["R_prime"] = to_json(residuals[i], ctx.tol.curvature);
    const Bilinear N = nabla_theta(ctx.M, ctx.spec.points[i], levi_civita_field(ctx.M), ctx.tol.derivative).matrix;
    const ResidualPair pr = prop42_residuals(N, pts[i].chart_point->point, cp);
    pts[i].record["closedness_criterion"] = {{"first", pr.first}, {"second", pr.second}};
  }
  const ClosednessEvidence ev = aggregate_evidence(pts);
  const bool pure = all_pure_parity(pts);
  const ClassificationVerdict v = classify_connection(cp, ctx.M.n, ev);
  const Agreement agreement = judge(v, numeric, ev, pure);
  report["points"] = point_records(pts);
  report["aggregate"] = {{"closedness", to_json(ev)}, {"pure_parity", pure}, {"numeric_P_tensor", numeric}};
  report["verdict"] = {{"case", to_string(v.case_id)},
                       {"clause", to_string(v.theorem43_clause)},
                       {"p_tensor_expected", to_string(v.p_tensor_expected)},
                       {"delta", v.delta},
                       {"notes", v.notes},
                       {"agreement", to_string(agreement)}};
  const bool pass = agreement != Agreement::mismatch;
  return finish(report, pass, pass ? "prediction and numerics agree" : "prediction and numerics disagree", out);
}

int cmd_verify(const Options& o, const std::string& identity, const ClassifyOptions& c, std::ostream& out) {
  if (std::find(kIdentities.begin(), kIdentities.end(), identity) == kIdentities.end())
    throw InputError("unknown identity '" + identity + "'");
  Context ctx = make_context(o);
  Json report = report_header("verify", ctx);
  Json conn;
  const ConnectionParams cp = resolve_connection(c, ctx.M.n, true, conn);
  conn.update(to_json(cp, ctx.M.n));
  report["identity"] = identity;
  report["connection"] = conn;

  auto pts = evaluate_points(ctx);
  if (!all_ok(pts)) {
    report["points"] = point_records(pts);
    return finish(report, false, "structure or W1 violation at a sample point", out);
  }
  const auto results = ordered_parallel_map<IdentityResult>(
      pts.size(), [&](size_t i) { return run_identity(identity, ctx, ctx.spec.points[i], cp); });
  double worst = 0.0;
  bool pass = true;
  for (size_t i = 0; i < pts.size(); ++i) {
    pts[i].record["identity"] = results[i].residuals;
    worst = std::max(worst, results[i].residual);
    pass = pass && results[i].residual <= results[i].tolerance;
  }
  report["points"] = point_records(pts);
  report["aggregate"] = {{"max_residual", worst}, {"tolerance", results.front().tolerance}, {"pass", pass}};
  return finish(report, pass, pass ? identity + " holds at every sampled point" : identity + " residual above tolerance",
                out);
}

int cmd_sweep(const Options& o, const SweepOptions& s, std::ostream& csv, std::ostream& err) {
  const auto [la, lb] = parse_range(s.lambda_range);
  const auto [ma, mb] = parse_range(s.mu_range);
  if (s.steps < 1 || s.steps > kMaxSweepSteps)
    throw InputError("--steps must lie in [1, " + std::to_string(kMaxSweepSteps) + "]");
  Context ctx = make_context(o);
  Json report = report_header("sweep", ctx);
  report["grid"] = {{"lambda_range", {la, lb}}, {"mu_range", {ma, mb}}, {"steps", s.steps}, {"conic_band", kConicBand}};

  std::ofstream json_file;
  if (!s.json_path.empty()) {
    json_file.open(s.json_path);
    if (!json_file) throw InputError("cannot write '" + s.json_path + "'");
  }
  std::ostream& summary_out = s.json_path.empty() ? err : json_file;

  const auto pts = evaluate_points(ctx);
  report["points"] = point_records(pts);
  if (!all_ok(pts)) return finish(report, false, "structure or W1 violation at a sample point", summary_out);

  const ClosednessEvidence ev = aggregate_evidence(pts);
  const bool pure = all_pure_parity(pts);
  const int n = ctx.M.n;
  const size_t cells = static_cast<size_t>(s.steps) * static_cast<size_t>(s.steps);
  const auto residuals = ordered_parallel_map<double>(cells, [&](size_t k) {
    const ConnectionParams cp{cell_value(la, lb, s.steps, static_cast<int>(k / s.steps)),
                              cell_value(ma, mb, s.steps, static_cast<int>(k % s.steps))};
    double r = 0.0;
    for (const auto& u : ctx.spec.points)
      r = std::max(r, curvature_identity_residuals(natural_curvature(ctx.M, u, cp).R, ctx.M.P_field(u)).p_tensor());
    return r;
  });

  csv << "lambda,mu,delta,case,p_tensor_residual,expected\n";
  Json cell_records = Json::array();
  Json mismatches = Json::array();
  size_t judged = 0, conic = 0;
  for (size_t k = 0; k < cells; ++k) {
    const ConnectionParams cp{cell_value(la, lb, s.steps, static_cast<int>(k / s.steps)),
                              cell_value(ma, mb, s.steps, static_cast<int>(k % s.steps))};
    const ClassificationVerdict v = classify_connection(cp, n, ev);
    const bool numeric = residuals[k] <= ctx.tol.curvature;
    const bool on_conic = std::abs(v.delta) <= kConicBand;
    const Agreement a = on_conic ? Agreement::not_judged : judge(v, numeric, ev, pure);
    if (on_conic) ++conic;
    else ++judged;
    csv << format_number(cp.lambda) << ',' << format_number(cp.mu) << ',' << format_number(v.delta) << ','
        << to_string(v.case_id) << ',' << format_number(residuals[k]) << ',' << to_string(v.p_tensor_expected) << '\n';
    Json rec = {{"index", k},
                {"lambda", cp.lambda},
                {"mu", cp.mu},
                {"delta", v.delta},
                {"case", to_string(v.case_id)},
                {"clause", to_string(v.theorem43_clause)},
                {"expected", to_string(v.p_tensor_expected)},
                {"p_tensor_residual", residuals[k]},
                {"numeric_P_tensor", numeric},
                {"on_conic", on_conic},
                {"agreement", to_string(a)}};
    if (a == Agreement::mismatch) mismatches.push_back(k);
    cell_records.push_back(std::move(rec));
  }
  report["aggregate"] = {{"closedness", to_json(ev)},
                         {"pure_parity", pure},
                         {"cells", cells},
                         {"judged_cells", judged},
                         {"conic_cells", conic},
                         {"mismatched_cells", mismatches}};
  report["cells"] = std::move(cell_records);
  const bool pass = mismatches.empty();
  return finish(report, pass, pass ? "no mismatch off the Delta = 0 conic" : "prediction/numerics mismatch",
                summary_out);
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App cli{"Numerical checks for natural connections on conformal Riemannian P-manifolds", "papm"};
  cli.set_version_flag("--version", PAPM_VERSION);
  cli.require_subcommand(1);

  Options o;
  double fd_step = 0.0;
  ClassifyOptions c;
  double lambda = 0.0, mu = 0.0;
  std::string named, identity;
  SweepOptions s;

  const auto common = [&](CLI::App* sub) {
    sub->add_option("spec", o.spec_path, "manifold spec (JSON)")->required();
    sub->add_option("--tol-curvature", o.tol.curvature, "tolerance for curvature-level residuals")
        ->capture_default_str();
    sub->add_option("--tol-derivative", o.tol.derivative, "tolerance for first-derivative residuals")
        ->capture_default_str();
    sub->add_option("--tol-structure", o.tol.structure, "tolerance for structure and W1 checks")
        ->capture_default_str();
    sub->add_option("--fd-step", fd_step, "finite-difference step (overrides the spec)");
  };
  const auto connection = [&](CLI::App* sub) {
    auto* nm = sub->add_option("--named", named, "D, Dtilde or canonical");
    sub->add_option("--lambda", lambda, "connection parameter lambda")->excludes(nm);
    sub->add_option("--mu", mu, "connection parameter mu")->excludes(nm);
  };

  auto* validate_cmd = cli.add_subcommand("validate", "check structure and W1 membership at the sample points");
  common(validate_cmd);
  auto* classify_cmd = cli.add_subcommand("classify", "predict and test whether R' is a Riemannian P-tensor");
  common(classify_cmd);
  connection(classify_cmd);
  auto* verify_cmd = cli.add_subcommand("verify", "evaluate an identity at the sample points");
  common(verify_cmd);
  connection(verify_cmd);
  verify_cmd->add_option("--identity", identity, "eq12, eq19, eq21, cor32, eq26p or naturality")->required();
  auto* sweep_cmd = cli.add_subcommand("sweep", "classify a (lambda, mu) grid");
  common(sweep_cmd);
  sweep_cmd->add_option("--lambda-range", s.lambda_range, "A:B")->required();
  sweep_cmd->add_option("--mu-range", s.mu_range, "A:B")->required();
  sweep_cmd->add_option("--steps", s.steps, "grid points per axis")->capture_default_str();
  sweep_cmd->add_option("--json", s.json_path, "write the JSON summary here instead of stderr");

  try {
    cli.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = cli.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    CLI::App* sub = cli.get_subcommands().front();
    if (sub->count("--fd-step")) o.fd_step = fd_step;
    if (sub->get_option_no_throw("--named") && sub->count("--named")) c.named = named;
    if (sub->get_option_no_throw("--lambda") && sub->count("--lambda")) c.lambda = lambda;
    if (sub->get_option_no_throw("--mu") && sub->count("--mu")) c.mu = mu;
    if (sub == validate_cmd) return cmd_validate(o, out);
    if (sub == classify_cmd) return cmd_classify(o, c, out);
    if (sub == verify_cmd) return cmd_verify(o, identity, c, out);
    return cmd_sweep(o, s, out, err);
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const dsl::DomainError& e) {
    err << "error: expression cannot be evaluated: " << e.what() << '\n';
    return kExitInput;
  } catch (const dsl::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const GeometryError& e) {
    err << "violation [" << e.check() << "]: " << e.what() << '\n';
    return kExitViolation;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  }
}

}  // namespace papm::app
