#include "sturm/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <ostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "sturm/asymptotic.hpp"
#include "sturm/error.hpp"
#include "sturm/oracle.hpp"
#include "sturm/potential.hpp"
#include "sturm/prufer.hpp"

namespace sturm::cli {

namespace {

using nlohmann::json;

const std::vector<std::string> kCommands{"eigen", "asym", "sweep", "dump-regularizer", "check-conditions"};

PotentialSpec spec_of(const RunConfig& c) { return {c.C, c.K, c.a, c.b}; }
BoundaryConditions bc_of(const RunConfig& c) { return {c.alpha, c.beta}; }
Regularizer regularizer_of(const RunConfig& c) {
  return build_regularizer(spec_of(c), c.regularizer == "chain" ? RegularizerForm::Chain : RegularizerForm::Singular,
                           c.chainDepth);
}

// Runs row(i) for i in [0, count) on worker_count() threads; rows keep index order.
// The first failure by index is rethrown after all workers finish.
template <class Row>
std::vector<std::vector<json>> parallel_rows(std::size_t count, Row row) {
  std::vector<std::vector<json>> rows(count);
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        rows[i] = row(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const unsigned threads = std::min<std::size_t>(worker_count(), std::max<std::size_t>(count, 1));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(work);
  work();
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return rows;
}

Table cmd_eigen(const RunConfig& cfg) {
  const Regularizer reg = regularizer_of(cfg);
  const BoundaryConditions bc = bc_of(cfg);
  if (cfg.method == "closed-form" && cfg.C != 0.0) throw ValidationError("closed-form method requires C = 0");
  Table t;
  t.columns = {"n", "lambda", "method", "residual"};
  t.rows = parallel_rows(static_cast<std::size_t>(cfg.nMax - cfg.nMin + 1), [&](std::size_t i) {
    const int n = cfg.nMin + static_cast<int>(i);
    EigenEstimate e;
    if (cfg.method == "oracle")
      e = oracle_eigenvalue(n, reg, bc, cfg.tol);
    else if (cfg.method == "closed-form")
      e = exact_zero_potential_eigen(n, cfg.a, cfg.b, bc);
    else
      e = solve_eigenvalue(n, reg, bc, cfg.tol);
    return std::vector<json>{n, e.lambda, e.methodTag(), e.residual};
  });
  return t;
}

Table cmd_asym(const RunConfig& cfg) {
  const Regularizer reg = regularizer_of(cfg);
  const BoundaryConditions bc = bc_of(cfg);
  AsymptoticOptions opt;
  opt.target = cfg.target == "angles" ? TargetRule::BoundaryAngles : TargetRule::CaseFormula;
  Table t;
  t.columns = {"n", "lambda_asym", "lambda_exact", "sqrtLambdaError", "scaledError"};
  t.rows = parallel_rows(static_cast<std::size_t>(cfg.nMax - cfg.nMin + 1), [&](std::size_t i) {
    const int n = cfg.nMin + static_cast<int>(i);
    const EigenEstimate exact = solve_eigenvalue(n, reg, bc, cfg.tol);
    if (!(exact.lambda > 0.0))
      throw DomainError("lambda_" + std::to_string(n) + " is not positive; raise --n-min for the asymptotic study");
    const EigenEstimate asym = asym_eigenvalue(n, cfg.orderN, reg, bc, opt);
    const double err = std::abs(std::sqrt(asym.lambda) - std::sqrt(exact.lambda));
    return std::vector<json>{n, asym.lambda, exact.lambda, err, err * std::pow(exact.lambda, 0.5 * cfg.orderN)};
  });
  return t;
}

Table cmd_sweep(const RunConfig& cfg) {
  const Regularizer reg = regularizer_of(cfg);
  const BoundaryConditions bc = bc_of(cfg);
  check_conditions(reg, cfg.orderN);
  Table t;
  t.columns = {"lambda", "thetaB", "expansionRhs", "residual", "scaledResidual"};
  t.rows = parallel_rows(static_cast<std::size_t>(cfg.ladderCount), [&](std::size_t i) {
    const double lambda = cfg.ladderStart * std::pow(cfg.ladderFactor, static_cast<double>(i));
    PruferOptions po;
    po.tol = std::min(cfg.tol, 1e-11);
    po.recordSteps = false;
    const PruferSolution sol = integrate_theta(lambda, reg, bc, po);
    const double rhs = expansion_rhs(cfg.orderN, lambda, reg, bc);
    const double residual = std::abs(sol.psiB - rhs);
    return std::vector<json>{lambda, sol.thetaB, rhs, residual, residual * std::pow(lambda, 0.5 * cfg.orderN)};
  });
  return t;
}

Table cmd_dump_regularizer(const RunConfig& cfg) {
  const Regularizer reg = regularizer_of(cfg);
  Table t;
  t.columns = {"field", "coeff", "signPower", "power", "logPower"};
  for (const auto& term : reg.fTerms) t.rows.push_back({"f", term.coeff, term.signPower, term.power, term.logPower});
  for (const auto& term : reg.FTerms) t.rows.push_back({"F", term.coeff, term.signPower, term.power, term.logPower});
  t.extra = {{"chainDepth", reg.chainDepth}, {"regularizer", to_json(reg)}};
  return t;
}

Table cmd_check_conditions(const RunConfig& cfg) {
  const Regularizer reg = regularizer_of(cfg);
  const ConditionReport report = check_conditions(reg, cfg.orderN);
  Table t;
  t.columns = {"product", "exponent", "logPower", "requirement", "ok"};
  for (const auto& w : report.witnesses)
    t.rows.push_back({w.product, std::isinf(w.exponent) ? json("inf") : json(w.exponent), w.logPower, w.requirement,
                      w.ok ? 1 : 0});
  t.extra = {{"chainDepth", reg.chainDepth}, {"report", to_json(report)}};
  return t;
}

std::string format_cell(const json& v) {
  if (v.is_string()) {
    const auto& s = v.get_ref<const std::string&>();
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
    return q + "\"";
  }
  if (v.is_number_integer() || v.is_boolean()) return v.dump();
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v.get<double>());
  return buf;
}

int exit_code_for(std::exception_ptr e, json& record) {
  try {
    std::rethrow_exception(e);
  } catch (const ValidationError& ex) {
    record = {{"kind", "validation"}, {"message", ex.what()}};
    return 2;
  } catch (const DomainError& ex) {
    record = {{"kind", "domain"}, {"message", ex.what()}};
    return 2;
  } catch (const BudgetExceeded& ex) {
    record = {{"kind", "budget"}, {"message", ex.what()}, {"bestValue", ex.bestValue()},
              {"errorEstimate", ex.errorEstimate()}};
    return 3;
  } catch (const InconsistencyError& ex) {
    record = {{"kind", "inconsistency"}, {"message", ex.what()}};
    return 4;
  } catch (const std::exception& ex) {
    record = {{"kind", "internal"}, {"message", ex.what()}};
    return 4;
  }
}

}  // namespace

void RunConfig::validate() const {
  if (std::find(kCommands.begin(), kCommands.end(), command) == kCommands.end())
    throw ValidationError("unknown command '" + command + "'");
  spec_of(*this).validate();
  bc_of(*this).validate();
  if (nMin < 0) throw ValidationError("n-min must be >= 0");
  if (nMax < nMin) throw ValidationError("n-max must be >= n-min");
  if (orderN < 1) throw ValidationError("order-N must be >= 1");
  if (!(tol > 0.0 && tol < 1.0)) throw ValidationError("tol must lie in (0,1)");
  if (method != "shooting" && method != "oracle" && method != "closed-form")
    throw ValidationError("method must be shooting, oracle or closed-form");
  if (target != "case" && target != "angles") throw ValidationError("target must be case or angles");
  if (regularizer != "singular" && regularizer != "chain") throw ValidationError("regularizer must be singular or chain");
  if (chainDepth < 0) throw ValidationError("chain-depth must be >= 0");
  if (format != "csv" && format != "json") throw ValidationError("format must be csv or json");
  if (!(ladderStart > 0.0) || !std::isfinite(ladderStart)) throw ValidationError("ladder-start must be positive");
  if (!(ladderFactor > 1.0) || !std::isfinite(ladderFactor)) throw ValidationError("ladder-factor must be > 1");
  if (ladderCount < 1) throw ValidationError("ladder-count must be >= 1");
}

json to_json(const RunConfig& c) {
  return {{"command", c.command},     {"C", c.C},
          {"K", c.K},                 {"a", c.a},
          {"b", c.b},                 {"alpha", c.alpha},
          {"beta", c.beta},           {"nMin", c.nMin},
          {"nMax", c.nMax},           {"orderN", c.orderN},
          {"tol", c.tol},             {"method", c.method},
          {"target", c.target},       {"regularizer", c.regularizer},
          {"chainDepth", c.chainDepth},   {"format", c.format},       {"out", c.out},
          {"ladderStart", c.ladderStart}, {"ladderFactor", c.ladderFactor},
          {"ladderCount", c.ladderCount}};
}

RunConfig config_from_json(const json& j) {
  RunConfig c;
  try {
    c.command = j.at("command").get<std::string>();
    c.C = j.at("C").get<double>();
    c.K = j.at("K").get<double>();
    c.a = j.at("a").get<double>();
    c.b = j.at("b").get<double>();
    c.alpha = j.at("alpha").get<double>();
    c.beta = j.at("beta").get<double>();
    c.nMin = j.at("nMin").get<int>();
    c.nMax = j.at("nMax").get<int>();
    c.orderN = j.at("orderN").get<int>();
    c.tol = j.at("tol").get<double>();
    c.method = j.at("method").get<std::string>();
    c.target = j.at("target").get<std::string>();
    c.regularizer = j.at("regularizer").get<std::string>();
    c.chainDepth = j.at("chainDepth").get<int>();
    c.format = j.at("format").get<std::string>();
    c.out = j.at("out").get<std::string>();
    c.ladderStart = j.at("ladderStart").get<double>();
    c.ladderFactor = j.at("ladderFactor").get<double>();
    c.ladderCount = j.at("ladderCount").get<int>();
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed config: ") + e.what());
  }
  return c;
}

Table execute(const RunConfig& cfg) {
  cfg.validate();
  if (cfg.command == "eigen") return cmd_eigen(cfg);
  if (cfg.command == "asym") return cmd_asym(cfg);
  if (cfg.command == "sweep") return cmd_sweep(cfg);
  if (cfg.command == "dump-regularizer") return cmd_dump_regularizer(cfg);
  return cmd_check_conditions(cfg);
}

std::string render(const RunConfig& cfg, const Table& table) {
  if (cfg.format == "json") {
    json rows = json::array();
    for (const auto& r : table.rows) {
      json obj = json::object();
      for (std::size_t k = 0; k < table.columns.size(); ++k) obj[table.columns[k]] = r[k];
      rows.push_back(std::move(obj));
    }
    json doc = {{"config", to_json(cfg)}, {"rows", rows}};
    if (table.extra.is_object())
      for (const auto& [key, value] : table.extra.items()) doc[key] = value;
    return doc.dump(2) + "\n";
  }
  std::string s;
  for (std::size_t k = 0; k < table.columns.size(); ++k) s += (k ? "," : "") + table.columns[k];
  s += "\n";
  for (const auto& r : table.rows) {
    for (std::size_t k = 0; k < r.size(); ++k) s += (k ? "," : "") + format_cell(r[k]);
    s += "\n";
  }
  return s;
}

unsigned worker_count() {
  unsigned n = 0;
  if (const char* env = std::getenv("STURM_ASYM_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) n = static_cast<unsigned>(v);
  }
  if (n == 0) n = std::max(1u, std::thread::hardware_concurrency());
  return n;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  CLI::App app{"Eigenvalues of -y'' + C|x|^-K y = lambda y on [a, b] with separated boundary conditions"};
  app.set_help_all_flag("--help-all");
  app.fallthrough();
  app.require_subcommand(0, 1);
  app.add_option("--C", cfg.C, "potential strength");
  app.add_option("--K", cfg.K, "singularity exponent, 1 <= K < 2");
  app.add_option("--a", cfg.a, "left endpoint");
  app.add_option("--b", cfg.b, "right endpoint");
  app.add_option("--alpha", cfg.alpha, "boundary angle at a, [0, pi)");
  app.add_option("--beta", cfg.beta, "boundary angle at b, [0, pi)");
  app.add_option("--n-min", cfg.nMin, "first eigenvalue index");
  app.add_option("--n-max", cfg.nMax, "last eigenvalue index");
  app.add_option("--order-N", cfg.orderN, "expansion order N");
  app.add_option("--tol", cfg.tol, "relative eigenvalue tolerance");
  app.add_option("--method", cfg.method, "shooting | oracle | closed-form");
  app.add_option("--target", cfg.target, "asymptotic target: case | angles");
  app.add_option("--regularizer", cfg.regularizer, "singular | chain");
  app.add_option("--chain-depth", cfg.chainDepth, "regularizer chain depth, 0 = minimal");
  app.add_option("--format", cfg.format, "csv | json");
  app.add_option("--out", cfg.out, "output file (default stdout)");
  app.add_option("--ladder-start", cfg.ladderStart, "first lambda of the sweep");
  app.add_option("--ladder-factor", cfg.ladderFactor, "ratio between sweep points");
  app.add_option("--ladder-count", cfg.ladderCount, "number of sweep points");
  bool dumpFlag = false;
  app.add_flag("--dump-regularizer", dumpFlag, "same as the dump-regularizer command");
  app.add_subcommand("eigen", "eigenvalues n-min..n-max");
  app.add_subcommand("asym", "asymptotic estimates against shooting");
  app.add_subcommand("sweep", "theta(b) and expansion residual along a lambda ladder");
  app.add_subcommand("dump-regularizer", "regularizer terms f, F");
  app.add_subcommand("check-conditions", "integrability conditions for order N");

  json record;
  int code = 0;
  try {
    try {
      std::vector<std::string> args;
      for (int i = argc - 1; i >= 1; --i) args.emplace_back(argv[i]);
      app.parse(args);
    } catch (const CLI::CallForHelp&) {
      out << app.help();
      return 0;
    } catch (const CLI::CallForAllHelp&) {
      out << app.help("", CLI::AppFormatMode::All);
      return 0;
    } catch (const CLI::ParseError& e) {
      throw ValidationError(e.what());
    }
    const auto subs = app.get_subcommands();
    if (!subs.empty())
      cfg.command = subs.front()->get_name();
    else if (dumpFlag)
      cfg.command = "dump-regularizer";
    else
      throw ValidationError("a command is required: eigen, asym, sweep, dump-regularizer or check-conditions");
    if (dumpFlag && cfg.command != "dump-regularizer")
      throw ValidationError("--dump-regularizer conflicts with command " + cfg.command);

    const Table table = execute(cfg);
    const std::string text = render(cfg, table);
    if (cfg.out.empty()) {
      out << text;
    } else {
      std::ofstream file(cfg.out, std::ios::binary);
      if (!file) throw ValidationError("cannot open output file " + cfg.out);
      file << text;
      if (!file) throw ValidationError("failed writing output file " + cfg.out);
    }
    return 0;
  } catch (...) {
    code = exit_code_for(std::current_exception(), record);
  }
  record["exitCode"] = code;
  err << json{{"error", record}}.dump() << "\n";
  return code;
}

}  // namespace sturm::cli
