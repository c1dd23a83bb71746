#include "cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <sstream>

#include <CLI11.hpp>
#include <omp.h>

#include "h2net/errors.hpp"
#include "h2net/network_io.hpp"
#include "h2net/reconstruct.hpp"
#include "h2net/reduction.hpp"

namespace h2net::cli {

using nlohmann::json;

std::map<std::string, std::string> read_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open config " + path);
  std::map<std::string, std::string> out;
  std::string line;
  int lineno = 0;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line.substr(0, line.find('#')));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw Error(ErrorCode::ParseError, path + ":" + std::to_string(lineno) + ": expected key = value");
    out[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return out;
}

std::vector<std::pair<long, long>> parse_zero_targets(const std::string& text) {
  std::vector<std::pair<long, long>> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ';')) {
    if (item.find_first_not_of(" \t") == std::string::npos) continue;
    long i = 0, j = 0;
    char comma = 0;
    std::istringstream is(item);
    if (!(is >> i >> comma >> j) || comma != ',' || i < 1 || j < 1)
      throw Error(ErrorCode::InvalidArgument, "bad zero target '" + item + "', expected i,j (1-based)");
    std::string rest;
    if (is >> rest) throw Error(ErrorCode::InvalidArgument, "bad zero target '" + item + "'");
    out.emplace_back(i - 1, j - 1);
  }
  return out;
}

std::vector<long> parse_orders(const std::string& text) {
  long a = 0, b = 0, c = 1;
  char s1 = 0, s2 = 0;
  std::istringstream is(text);
  if (!(is >> a >> s1 >> b) || s1 != ':')
    throw Error(ErrorCode::InvalidArgument, "orders must look like start:stop[:step]");
  if (is >> s2) {
    if (s2 != ':' || !(is >> c)) throw Error(ErrorCode::InvalidArgument, "orders must look like start:stop:step");
  }
  if (c < 1 || a < 1 || b < a) throw Error(ErrorCode::InvalidArgument, "orders need 1 <= start <= stop, step >= 1");
  std::vector<long> out;
  for (long r = a; r <= b; r += c) out.push_back(r);
  return out;
}

namespace {

int exit_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument:
    case ErrorCode::RankTooLarge: return kBadFlags;
    case ErrorCode::DisconnectedAfterRetries: return kGenerationFailed;
    case ErrorCode::Infeasible: return kInfeasible;
    case ErrorCode::NoSolutionFound: return kNoSolution;
    case ErrorCode::NotMMatrix: return kNotMMatrix;
    case ErrorCode::IoError:
    case ErrorCode::ParseError:
    case ErrorCode::SchemaError: return kIoError;
    default: return kNumericalFailure;
  }
}

std::string fmt(double x) {
  if (!std::isfinite(x)) return "nan";
  std::ostringstream s;
  s << std::setprecision(10) << x;
  return s.str();
}

json number_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

// Settings that may come from --config; explicit flags win.
struct Settings {
  double margin = 1e-7;
  sdp::SolverOptions solver;
  SparsityOptions sparsity;
};

void apply_config(Settings& s, const std::map<std::string, std::string>& cfg) {
  for (const auto& [key, value] : cfg) {
    try {
      if (key == "margin") s.margin = std::stod(value);
      else if (key == "feasibility_tol") s.solver.feasibility_tol = std::stod(value);
      else if (key == "gap_tol") s.solver.gap_tol = std::stod(value);
      else if (key == "near_feasibility_tol") s.solver.near_feasibility_tol = std::stod(value);
      else if (key == "near_gap_tol") s.solver.near_gap_tol = std::stod(value);
      else if (key == "max_iterations") s.solver.max_iterations = std::stoi(value);
      else if (key == "sparsity_starts") s.sparsity.starts = std::stoi(value);
      else if (key == "sparsity_seed") s.sparsity.seed = std::stoull(value);
      else if (key == "sparsity_tol") s.sparsity.tolerance = std::stod(value);
      else throw Error(ErrorCode::InvalidArgument, "unknown config key '" + key + "'");
    } catch (const std::logic_error&) {
      throw Error(ErrorCode::InvalidArgument, "bad value for config key '" + key + "': " + value);
    }
  }
}

struct RowResult {
  long r = 0;
  std::string status;
  double gamma = std::numeric_limits<double>::quiet_NaN();
  double bound = std::numeric_limits<double>::quiet_NaN();
  double actual = std::numeric_limits<double>::quiet_NaN();
  bool within = false;
  double seconds = 0.0;
  std::string error;
  int exit = kOk;
  std::optional<ReducedModel> model;
};

RowResult reduce_row(const SecondOrderNetwork& net, long r, const Settings& s, bool refine) {
  RowResult row;
  row.r = r;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    const SecondOrderSystem sys = net.system();
    const ReductionProgram prog = formulate_sdp(sys, r, s.margin);
    const SdpCertificate cert = solve_sdp(prog, s.solver);
    row.status = sdp::to_string(cert.status);
    row.gamma = cert.gamma;
    row.bound = std::sqrt(std::max(0.0, cert.gamma));
    ReducedModel red = extract_reduced(cert, sys);
    try {
      if (refine) red = refine_output(sys, red);
      const H2Report rep = certified_error(sys, red);
      row.actual = rep.actual;
      row.within = rep.within_bound;
    } catch (const Error& e) {
      row.error = std::string("error evaluation: ") + e.what();
    }
    row.model = std::move(red);
  } catch (const Error& e) {
    row.status = e.code() == ErrorCode::Infeasible ? "infeasible" : "failed";
    row.error = e.what();
    row.exit = exit_for(e.code());
  }
  row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return row;
}

void write_network_file(const SecondOrderNetwork& net, const std::string& path, const json& meta) {
  json j = network_to_json(net);
  if (!meta.is_null()) j["meta"] = meta;
  write_text_file(path, j.dump(2) + "\n");
}

int cmd_generate(const std::string& model, long n, long m, double p, double alpha, double beta,
                 std::uint64_t seed, double ground, const std::string& mm_path, const std::string& out_path,
                 std::ostream& out) {
  json meta = {{"model", model}};
  SecondOrderNetwork net = build_msd_example();
  if (model == "msd-example") {
    // Kept exactly as printed; --alpha/--beta do not apply.
  } else {
    Matrix L;
    if (model == "holme-kim") {
      L = generate_powerlaw_cluster(n, m, p, seed);
      meta["n"] = n;
      meta["m"] = m;
      meta["p_triangle"] = p;
      meta["seed"] = seed;
    } else if (model == "ring") {
      L = ring_laplacian(n);
    } else if (model == "path") {
      L = path_laplacian(n);
    } else {
      std::istringstream in(read_text_file(mm_path));
      L = read_matrix_market(in);
      meta["source"] = mm_path;
    }
    net = build_grounded_system(L, alpha, beta, ground);
  }
  const ValidationReport rep = validate(net);
  if (!rep.ok()) {
    std::string msg = "generated network fails validation:";
    for (const auto& f : rep.failures()) msg += " " + f + ";";
    throw Error(ErrorCode::DisconnectedAfterRetries, msg);
  }
  write_network_file(net, out_path, meta);
  out << "wrote " << out_path << " (n=" << net.nodes() << ", alpha=" << fmt(net.alpha())
      << ", beta=" << fmt(net.beta()) << ")\n";
  return kOk;
}

int cmd_reduce(const std::string& in_path, long r, const std::string& out_path, bool refine,
               const Settings& s, std::ostream& out, std::ostream& err) {
  const SecondOrderNetwork net = load_network(in_path);
  if (r < 1 || r >= net.nodes()) {
    err << "error: order must satisfy 1 <= r < n (n = " << net.nodes() << ")\n";
    return kBadFlags;
  }
  const RowResult row = reduce_row(net, r, s, refine);
  if (row.exit != kOk) {
    err << "error: " << row.error << "\n";
    return row.exit;
  }
  json j = reduced_to_json(*row.model);
  j["report"] = {{"status", row.status},
                 {"gamma_raw", row.gamma},
                 {"certified_bound", row.bound},
                 {"actual_h2_error", number_or_null(row.actual)},
                 {"actual_sq_le_gamma", row.within},
                 {"output_refined", refine},
                 {"wall_time_seconds", row.seconds}};
  if (!row.error.empty()) j["report"]["error"] = row.error;
  write_text_file(out_path, j.dump(2) + "\n");
  out << "r=" << r << " status=" << row.status << " gamma=" << fmt(row.gamma)
      << " bound=" << fmt(row.bound) << " actual=" << fmt(row.actual)
      << " actual^2<=gamma=" << (row.within ? "yes" : "no") << " wall=" << fmt(row.seconds) << "s\n";
  if (!row.error.empty()) err << "warning: " << row.error << "\n";
  return kOk;
}

int cmd_reconstruct(const std::string& in_path, const std::string& zeros, const std::string& method,
                    const std::string& tail, const std::string& t_choice, const std::string& out_path,
                    const Settings& s, std::ostream& out, std::ostream& err) {
  const ReducedModel red = reduced_from_json(parse_json_text(read_text_file(in_path)));
  const TailOrder order = tail == "ascending" ? TailOrder::Ascending : TailOrder::Descending;
  GraphRealization g;
  json meta = {{"method", method}};
  if (method == "householder") {
    const HouseholderResult h = householder_tridiag(red.Kr_hat);
    g = householder_realization(red);
    meta["diag_dominant"] = h.diag_dominant;
    if (!h.diag_dominant) err << "note: tridiagonal realization is not diagonally dominant; not a network\n";
  } else {
    std::vector<std::pair<Index, Index>> targets;
    for (auto [i, j] : parse_zero_targets(zeros)) targets.emplace_back(i, j);
    TFactor t;
    if (!targets.empty()) {
      SparsityOptions so = s.sparsity;
      so.tail = order;
      try {
        const SparsityResult sr = solve_sparsity(red, targets, so);
        t = sr.t;
        meta["sparsity_residual"] = sr.residual;
        meta["sparsity_start"] = sr.start_index;
      } catch (const Error& e) {
        if (e.code() == ErrorCode::NoSolutionFound) err << "error: " << e.what() << "\n";
        throw;
      }
    } else {
      t = t_choice == "base" ? base_t_factor(red.r) : helmert_t_factor(red.r);
    }
    ReconstructOptions ro;
    ro.tail = order;
    g = reconstruct(red, t, ro);
    meta["T"] = matrix_to_json(t.T);
  }
  meta["lambda_r"] = g.lambda_r;
  meta["Ur"] = matrix_to_json(g.Ur);
  write_network_file(g.to_network(), out_path, meta);
  out << "wrote " << out_path << " (r=" << red.r << ", method=" << method
      << ", max off-diagonal=" << fmt(g.max_offdiag) << ")\n";
  return kOk;
}

int cmd_sweep(const std::string& in_path, const std::string& orders_text, int jobs,
              const std::string& csv_path, const std::string& json_path, bool refine, const Settings& s,
              std::ostream& out, std::ostream& err) {
  const json raw = parse_json_text(read_text_file(in_path));
  const SecondOrderNetwork net = network_from_json(raw);
  const std::vector<long> orders = parse_orders(orders_text);
  for (long r : orders)
    if (r >= net.nodes()) {
      err << "error: order " << r << " is not below n = " << net.nodes() << "\n";
      return kBadFlags;
    }
  std::vector<RowResult> rows(orders.size());
  const int count = static_cast<int>(orders.size());
#pragma omp parallel for schedule(dynamic, 1) num_threads(std::max(1, jobs))
  for (int k = 0; k < count; ++k) rows[k] = reduce_row(net, orders[k], s, refine);

  std::ostringstream csv;
  csv << "r,status,gamma_raw,certified_bound,actual_h2_error,actual_sq_le_gamma,wall_time_seconds\n";
  json jrows = json::array();
  bool any_optimal = false;
  for (const auto& row : rows) {
    any_optimal = any_optimal || row.status == "optimal";
    csv << row.r << "," << row.status << "," << fmt(row.gamma) << "," << fmt(row.bound) << ","
        << fmt(row.actual) << "," << (row.within ? 1 : 0) << "," << fmt(row.seconds) << "\n";
    json jr = {{"r", row.r},
               {"status", row.status},
               {"gamma_raw", number_or_null(row.gamma)},
               {"certified_bound", number_or_null(row.bound)},
               {"actual_h2_error", number_or_null(row.actual)},
               {"actual_sq_le_gamma", row.within},
               {"wall_time_seconds", row.seconds}};
    if (!row.error.empty()) jr["error"] = row.error;
    jrows.push_back(std::move(jr));
  }
  double full_h2 = std::numeric_limits<double>::quiet_NaN();
  try {
    full_h2 = linalg::h2_norm(net.system().state_space());
  } catch (const Error& e) {
    err << "warning: full-model H2 norm unavailable: " << e.what() << "\n";
  }
  json report;
  report["metadata"] = {{"n", net.nodes()},
                        {"alpha", net.alpha()},
                        {"beta", net.beta()},
                        {"seed", raw.contains("meta") && raw["meta"].contains("seed") ? raw["meta"]["seed"] : json(nullptr)},
                        {"orders", orders},
                        {"margin", s.margin},
                        {"feasibility_tol", s.solver.feasibility_tol},
                        {"gap_tol", s.solver.gap_tol},
                        {"max_iterations", s.solver.max_iterations},
                        {"output_refined", refine},
                        {"full_h2_norm", number_or_null(full_h2)}};
  report["rows"] = jrows;
  if (!csv_path.empty()) write_text_file(csv_path, csv.str());
  if (!json_path.empty()) write_text_file(json_path, report.dump(2) + "\n");
  if (csv_path.empty() && json_path.empty()) out << csv.str();
  else out << "wrote " << rows.size() << " rows\n";
  for (const auto& row : rows)
    if (!row.error.empty()) err << "r=" << row.r << ": " << row.error << "\n";
  return any_optimal ? kOk : kNumericalFailure;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"H2 model reduction of diffusively coupled second-order networks"};
  app.require_subcommand(1);
  std::string config_path;
  app.add_option("--config", config_path, "key = value file with solver settings");

  Settings s;
  double margin = std::numeric_limits<double>::quiet_NaN();
  int max_iter = -1;

  auto* gen = app.add_subcommand("generate", "write a network file");
  std::string model = "msd-example", out_path, mm_path;
  long n = 100, m = 2;
  double p = 0.5, alpha = 0.97, beta = 0.15, ground = 1.0;
  std::uint64_t seed = 1;
  gen->add_option("--model", model)->check(CLI::IsMember({"msd-example", "holme-kim", "ring", "path", "matrix-market"}));
  gen->add_option("--n", n)->check(CLI::Range(3L, 100000L));
  gen->add_option("--m", m)->check(CLI::PositiveNumber);
  gen->add_option("--p-triangle", p)->check(CLI::Range(0.0, 1.0));
  gen->add_option("--alpha", alpha);
  gen->add_option("--beta", beta);
  gen->add_option("--seed", seed);
  gen->add_option("--ground", ground, "grounding stiffness at node 1");
  gen->add_option("--laplacian-mm", mm_path, "Matrix Market file of L (model matrix-market)");
  gen->add_option("--out", out_path)->required();

  auto* red = app.add_subcommand("reduce", "reduce a network to order r");
  std::string in_path;
  long order = 0;
  bool refine = false;
  red->add_option("--in", in_path)->required();
  red->add_option("--order,-r", order)->required()->check(CLI::PositiveNumber);
  red->add_option("--out", out_path)->required();
  red->add_flag("--refine-output", refine, "replace Hr with the error-optimal output matrix");
  red->add_option("--margin", margin, "strictness margin on every cone");
  red->add_option("--max-iterations", max_iter);

  auto* rec = app.add_subcommand("reconstruct", "realize a reduced model as a network");
  std::string zeros, method = "theorem2", tail = "descending", t_choice = "helmert";
  rec->add_option("--in", in_path)->required();
  rec->add_option("--zeros", zeros, "zero couplings \"i,j;i,j\" (1-based)");
  rec->add_option("--method", method)->check(CLI::IsMember({"theorem2", "householder"}));
  rec->add_option("--tail-order", tail)->check(CLI::IsMember({"descending", "ascending"}));
  rec->add_option("--t-factor", t_choice, "T when no zeros are given")->check(CLI::IsMember({"helmert", "base"}));
  rec->add_option("--out", out_path)->required();

  auto* sw = app.add_subcommand("sweep", "reduce over a range of orders");
  std::string orders = "1:3:1", csv_path, json_path;
  int jobs = 1;
  sw->add_option("--in", in_path)->required();
  sw->add_option("--orders", orders, "start:stop:step");
  sw->add_option("--jobs", jobs)->check(CLI::PositiveNumber);
  sw->add_option("--csv", csv_path);
  sw->add_option("--json", json_path);
  sw->add_flag("--refine-output", refine);
  sw->add_option("--margin", margin);
  sw->add_option("--max-iterations", max_iter);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kBadFlags;
  }

  try {
    if (!config_path.empty()) apply_config(s, read_config(config_path));
    if (std::isfinite(margin)) s.margin = margin;
    if (max_iter > 0) s.solver.max_iterations = max_iter;
    if (!(s.margin > 0.0)) throw Error(ErrorCode::InvalidArgument, "margin must be positive");

    if (gen->parsed()) {
      if (model == "matrix-market" && mm_path.empty())
        throw Error(ErrorCode::InvalidArgument, "--laplacian-mm is required for model matrix-market");
      if (m >= n) throw Error(ErrorCode::InvalidArgument, "--m must be below --n");
      try {
        return cmd_generate(model, n, m, p, alpha, beta, seed, ground, mm_path, out_path, out);
      } catch (const Error& e) {
        if (e.code() == ErrorCode::InvalidArgument || e.code() == ErrorCode::IoError ||
            e.code() == ErrorCode::ParseError)
          throw;
        err << "error: " << e.what() << "\n";
        return kGenerationFailed;
      }
    }
    if (red->parsed()) return cmd_reduce(in_path, order, out_path, refine, s, out, err);
    if (rec->parsed()) return cmd_reconstruct(in_path, zeros, method, tail, t_choice, out_path, s, out, err);
    if (sw->parsed()) return cmd_sweep(in_path, orders, jobs, csv_path, json_path, refine, s, out, err);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::NoSolutionFound) err << "error: " << e.what() << "\n";
    return exit_for(e.code());
  }
  return kBadFlags;
}

}  // namespace h2net::cli
