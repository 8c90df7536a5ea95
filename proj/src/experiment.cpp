#include "levsample/experiment.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <tuple>

#include <json.hpp>

#include "levsample/matrix_io.hpp"
#include "levsample/rng.hpp"

namespace levsample {

using Json = nlohmann::ordered_json;

namespace {

constexpr std::uint64_t kResponseStream = 0x7265737000000000ULL;
constexpr std::uint64_t kSketchStream = 0x736b657400000000ULL;

[[noreturn]] void config_fail(const std::string& where, const std::string& what) {
  throw ConfigError(where + ": " + what);
}

template <typename T>
T get_as(const nlohmann::json& j, const std::string& where) {
  try {
    return j.get<T>();
  } catch (const nlohmann::json::exception&) {
    config_fail(where, "wrong type");
  }
}

Index get_count(const nlohmann::json& j, const std::string& where) {
  if (!j.is_number_integer() && !j.is_number_unsigned()) config_fail(where, "expected an integer");
  const auto v = j.get<std::int64_t>();
  return static_cast<Index>(v);
}

DesignSpec parse_design(const nlohmann::json& j, std::optional<Seed>& seed_out) {
  if (!j.is_object()) config_fail("/design", "expected an object");
  DesignSpec spec;
  if (!j.contains("family")) config_fail("/design/family", "missing");
  std::string family = get_as<std::string>(j["family"], "/design/family");
  // T1, T3, ... shorthand for the t family with that many degrees of freedom.
  if (family.size() > 1 && family[0] == 'T' &&
      family.find_first_not_of("0123456789", 1) == std::string::npos) {
    spec.df = std::stoi(family.substr(1));
    family = "T";
  }
  try {
    spec.family = design_family_from_string(family);
  } catch (const std::invalid_argument& e) {
    config_fail("/design/family", e.what());
  }
  for (const auto& [key, value] : j.items()) {
    const std::string where = "/design/" + key;
    if (key == "family") continue;
    if (key == "n") spec.n = get_count(value, where);
    else if (key == "p") spec.p = get_count(value, where);
    else if (key == "df") spec.df = static_cast<int>(get_count(value, where));
    else if (key == "keep") spec.keep = get_count(value, where);
    else if (key == "seed") seed_out = get_as<Seed>(value, where);
    else config_fail(where, "unknown key");
  }
  return spec;
}

SchemeSpec parse_scheme(const nlohmann::json& j, const std::string& where) {
  SchemeSpec s;
  std::string name;
  if (j.is_string()) {
    name = j.get<std::string>();
  } else if (j.is_object()) {
    if (!j.contains("name")) config_fail(where + "/name", "missing");
    name = get_as<std::string>(j["name"], where + "/name");
  } else {
    config_fail(where, "expected a scheme name or object");
  }
  if (name == "LEVUNW") {
    s.scheme = Scheme::Lev;
    s.weighted = false;
  } else {
    try {
      s.scheme = scheme_from_string(name);
    } catch (const std::invalid_argument&) {
      config_fail(where + "/name", "unknown scheme '" + name + "' (UNIF, LEV, SLEV, LEVUNW)");
    }
    if (s.scheme == Scheme::Custom) config_fail(where + "/name", "CUSTOM is not allowed here");
  }
  if (j.is_object()) {
    for (const auto& [key, value] : j.items()) {
      const std::string at = where + "/" + key;
      if (key == "name") continue;
      if (key == "alpha") s.alpha = get_as<double>(value, at);
      else if (key == "weighted") s.weighted = get_as<bool>(value, at);
      else if (key == "source") {
        try {
          s.source = score_source_from_string(get_as<std::string>(value, at));
        } catch (const std::invalid_argument& e) {
          config_fail(at, e.what());
        }
      } else if (key == "r1") s.r1 = get_count(value, at);
      else if (key == "r2") s.r2 = get_count(value, at);
      else config_fail(at, "unknown key");
    }
  }
  return s;
}

Index parse_r(const nlohmann::json& j, Index p, const std::string& where) {
  if (j.is_string()) {
    const std::string text = j.get<std::string>();
    if (text.size() < 2 || text.back() != 'p') config_fail(where, "expected a count or '<k>p'");
    double k = 0.0;
    try {
      std::size_t used = 0;
      k = std::stod(text.substr(0, text.size() - 1), &used);
      if (used != text.size() - 1) throw std::invalid_argument(text);
    } catch (const std::exception&) {
      config_fail(where, "bad multiple '" + text + "'");
    }
    return static_cast<Index>(std::llround(k * static_cast<double>(p)));
  }
  return get_count(j, where);
}

Json scheme_json(const SchemeSpec& s) {
  Json j;
  j["name"] = s.scheme == Scheme::Lev && !s.weighted ? std::string("LEVUNW") : to_string(s.scheme);
  j["alpha"] = s.alpha;
  j["weighted"] = s.weighted;
  j["source"] = to_string(s.source);
  j["r1"] = s.r1;
  j["r2"] = s.r2;
  return j;
}

Index effective_p(const DesignSpec& d) {
  const Index fixed = family_fixed_p(d.family);
  return fixed != 0 ? fixed : d.p;
}

}  // namespace

std::string timestamp_utc() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void ExperimentConfig::set_master_seed(Seed seed) {
  master_seed = seed;
  if (!design_seed_pinned) design.seed = seed;
}

void ExperimentConfig::validate() const {
  if (design.n < 1) config_fail("/design/n", "must be >= 1");
  const Index p = effective_p(design);
  if (p < 1) config_fail("/design/p", "must be >= 1");
  if (design.p != 0 && family_fixed_p(design.family) != 0 && design.p != family_fixed_p(design.family)) {
    config_fail("/design/p", std::string(to_string(design.family)) + " requires p = " +
                                 std::to_string(family_fixed_p(design.family)));
  }
  if (design.n < p) config_fail("/design", "requires n >= p");
  if (design.df < 1) config_fail("/design/df", "must be >= 1");
  if (design.family == DesignFamily::ReplicatedRow && (design.keep < 1 || design.keep > design.n)) {
    config_fail("/design/keep", "must be in [1, n]");
  }
  if (!(sigma2 >= 0.0) || !std::isfinite(sigma2)) config_fail("/sigma2", "must be finite and >= 0");
  if (beta0 && beta0->size() != p) config_fail("/beta0", "length must equal p");
  if (schemes.empty()) config_fail("/schemes", "must be nonempty");
  for (std::size_t i = 0; i < schemes.size(); ++i) {
    const SchemeSpec& s = schemes[i];
    const std::string where = "/schemes/" + std::to_string(i);
    if (s.scheme == Scheme::Slev && !(s.alpha > 0.0 && s.alpha < 1.0)) {
      config_fail(where + "/alpha", "SLEV needs alpha in (0, 1)");
    }
    if (s.r1 != 0 && (s.r1 < p || s.r1 > design.n)) config_fail(where + "/r1", "must be in [p, n]");
    if (s.r2 < 0) config_fail(where + "/r2", "must be >= 1");
  }
  if (r_grid.empty()) config_fail("/r_grid", "must be nonempty");
  for (std::size_t i = 0; i < r_grid.size(); ++i) {
    if (r_grid[i] < 1) config_fail("/r_grid/" + std::to_string(i), "must be >= 1");
  }
  if (reps < 2) config_fail("/reps", "must be >= 2");
  if (threads && *threads < 1) config_fail("/threads", "must be >= 1");
}

std::string ExperimentConfig::canonical_json() const {
  Json j;
  Json d;
  d["family"] = to_string(design.family);
  d["n"] = design.n;
  d["p"] = effective_p(design);
  d["df"] = design.df;
  d["keep"] = design.keep;
  d["seed"] = design.seed;
  j["design"] = d;
  j["sigma2"] = sigma2;
  if (beta0) {
    j["beta0"] = std::vector<double>(beta0->data(), beta0->data() + beta0->size());
  } else {
    j["beta0"] = nullptr;
  }
  Json s = Json::array();
  for (const SchemeSpec& scheme : schemes) s.push_back(scheme_json(scheme));
  j["schemes"] = s;
  j["r_grid"] = r_grid;
  j["mode"] = to_string(mode);
  j["reps"] = reps;
  j["master_seed"] = master_seed;
  j["output_dir"] = output_dir.string();
  if (threads) {
    j["threads"] = *threads;
  } else {
    j["threads"] = nullptr;
  }
  return j.dump();
}

std::string ExperimentConfig::digest() const {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : canonical_json()) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash));
  return buf;
}

ExperimentConfig parse_experiment_config(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::parse_error& e) {
    // nlohmann reports "parse error at line L, column C: ..."
    throw ConfigError(std::string("config syntax: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config: top level must be an object");

  ExperimentConfig cfg;
  std::optional<Seed> design_seed;
  bool have_design = false;
  const nlohmann::json* r_grid_json = nullptr;
  for (const auto& [key, value] : j.items()) {
    const std::string where = "/" + key;
    if (key == "design") {
      cfg.design = parse_design(value, design_seed);
      have_design = true;
    } else if (key == "sigma2") {
      cfg.sigma2 = get_as<double>(value, where);
    } else if (key == "beta0") {
      if (value.is_null()) continue;
      const auto values = get_as<std::vector<double>>(value, where);
      cfg.beta0 = Eigen::Map<const Vector>(values.data(), static_cast<Index>(values.size()));
    } else if (key == "schemes") {
      if (!value.is_array()) config_fail(where, "expected an array");
      for (std::size_t i = 0; i < value.size(); ++i) {
        cfg.schemes.push_back(parse_scheme(value[i], where + "/" + std::to_string(i)));
      }
    } else if (key == "r_grid") {
      if (!value.is_array()) config_fail(where, "expected an array");
      r_grid_json = &value;
    } else if (key == "mode") {
      try {
        cfg.mode = study_mode_from_string(get_as<std::string>(value, where));
      } catch (const std::invalid_argument& e) {
        config_fail(where, e.what());
      }
    } else if (key == "reps") {
      cfg.reps = get_count(value, where);
    } else if (key == "master_seed") {
      cfg.master_seed = get_as<Seed>(value, where);
    } else if (key == "output_dir") {
      cfg.output_dir = get_as<std::string>(value, where);
    } else if (key == "threads") {
      if (!value.is_null()) cfg.threads = static_cast<unsigned>(get_count(value, where));
    } else {
      config_fail(where, "unknown key");
    }
  }
  if (!have_design) config_fail("/design", "missing");
  cfg.design_seed_pinned = design_seed.has_value();
  cfg.design.seed = design_seed.value_or(cfg.master_seed);
  if (r_grid_json != nullptr) {
    const Index p = effective_p(cfg.design);
    for (std::size_t i = 0; i < r_grid_json->size(); ++i) {
      cfg.r_grid.push_back(parse_r((*r_grid_json)[i], p, "/r_grid/" + std::to_string(i)));
    }
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path.string() + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_experiment_config(buffer.str());
}

RegressionProblem build_problem(const ExperimentConfig& config) {
  RegressionProblem problem;
  problem.X = gen_design(config.design);
  problem.beta0 = config.beta0 ? *config.beta0 : default_beta(problem.X.cols());
  problem.sigma2 = config.sigma2;
  problem.y = gen_response(problem.X, *problem.beta0, config.sigma2,
                           derive_seed(config.master_seed, {kResponseStream}));
  return problem;
}

RunRecord run_experiment(const ExperimentConfig& config, unsigned threads) {
  config.validate();
  using Clock = std::chrono::steady_clock;
  RunRecord record;
  record.config_digest = config.digest();
  record.version = std::string(kVersion);
  record.timestamp = timestamp_utc();

  auto phase_start = Clock::now();
  auto end_phase = [&](const char* name) {
    const std::chrono::duration<double> d = Clock::now() - phase_start;
    record.timings.push_back({name, d.count()});
    phase_start = Clock::now();
  };

  const RegressionProblem problem = build_problem(config);
  const Index n = problem.n();
  const Index p = problem.p();
  end_phase("generate");

  std::optional<LeverageScores> exact;
  std::map<std::tuple<int, Index, Index>, LeverageScores> approx;
  std::vector<SamplingDistribution> dists;
  for (const SchemeSpec& s : config.schemes) {
    if (s.scheme == Scheme::Unif) {
      dists.push_back(uniform_distribution(n));
      continue;
    }
    const LeverageScores* scores = nullptr;
    if (s.source == ScoreSource::Exact) {
      if (!exact) exact = leverage_scores_exact(problem.X);
      scores = &*exact;
    } else {
      ApproxLeverageConfig cfg;
      cfg.r1 = s.r1 != 0 ? s.r1 : std::min<Index>(n, 2 * p);
      cfg.r2 = s.r2 != 0 ? s.r2
                         : static_cast<Index>(std::ceil(10.0 * std::log(static_cast<double>(n))));
      cfg.kind = s.source == ScoreSource::BFast ? ProjectionKind::Binary : ProjectionKind::Gaussian;
      cfg.seed = derive_seed(config.master_seed,
                             {kSketchStream, static_cast<std::uint64_t>(cfg.kind)});
      const auto key = std::make_tuple(static_cast<int>(cfg.kind), cfg.r1, cfg.r2);
      auto it = approx.find(key);
      if (it == approx.end()) {
        it = approx.emplace(key, approx_leverage(problem.X, cfg).as_leverage_scores()).first;
      }
      scores = &it->second;
    }
    dists.push_back(s.scheme == Scheme::Slev ? build_distribution(Scheme::Slev, *scores, s.alpha)
                                             : build_distribution(s.scheme, *scores));
  }
  end_phase("leverage");

  for (std::size_t si = 0; si < config.schemes.size(); ++si) {
    const SchemeSpec& s = config.schemes[si];
    for (std::size_t ri = 0; ri < config.r_grid.size(); ++ri) {
      const Seed cell_seed = derive_seed(config.master_seed, {ri});
      const Index r = config.r_grid[ri];
      record.reports.push_back(
          config.mode == StudyMode::Conditional
              ? run_conditional(problem, dists[si], r, s.weighted, config.reps, cell_seed, threads)
              : run_unconditional(problem, dists[si], r, s.weighted, config.reps, cell_seed,
                                  threads));
    }
  }
  end_phase("simulate");
  return record;
}

namespace {

void write_report_prefix(std::ostream& out, const BiasVarianceReport& rep) {
  out << rep.scheme << ',' << format_double(rep.alpha) << ',' << to_string(rep.mode) << ','
      << (rep.weighted ? 1 : 0) << ',' << rep.r;
}

}  // namespace

void write_report_csv(std::ostream& out, const std::vector<BiasVarianceReport>& reports) {
  out << "scheme,alpha,mode,weighted,r,reps,bias_sq,variance_trace,mse,analytic_variance_trace,"
         "rank_deficient_count\n";
  for (const BiasVarianceReport& rep : reports) {
    write_report_prefix(out, rep);
    out << ',' << rep.reps << ',' << format_double(rep.bias_sq) << ','
        << format_double(rep.variance_trace) << ',' << format_double(rep.mse) << ','
        << (rep.analytic_variance_trace ? format_double(*rep.analytic_variance_trace) : "") << ','
        << rep.rank_deficient_count << '\n';
  }
}

void write_report_coords_csv(std::ostream& out, const std::vector<BiasVarianceReport>& reports) {
  out << "scheme,alpha,mode,weighted,r,coord,mean,reference,bias,variance,wls_reference\n";
  for (const BiasVarianceReport& rep : reports) {
    for (Index k = 0; k < rep.mean_estimate.size(); ++k) {
      write_report_prefix(out, rep);
      out << ',' << k << ',' << format_double(rep.mean_estimate(k)) << ','
          << format_double(rep.reference(k)) << ',' << format_double(rep.coord_bias(k)) << ','
          << format_double(rep.coord_variance(k)) << ','
          << (rep.wls_reference ? format_double((*rep.wls_reference)(k)) : "") << '\n';
    }
  }
}

std::string run_record_json(const RunRecord& record, const ExperimentConfig& config) {
  auto vec = [](const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
  Json j;
  j["config_digest"] = record.config_digest;
  j["version"] = record.version;
  j["timestamp"] = record.timestamp;
  j["config"] = Json::parse(config.canonical_json());
  Json timings = Json::array();
  for (const PhaseTiming& t : record.timings) timings.push_back({{"phase", t.phase}, {"seconds", t.seconds}});
  j["timings"] = timings;
  Json reports = Json::array();
  for (const BiasVarianceReport& rep : record.reports) {
    Json r;
    r["scheme"] = rep.scheme;
    r["alpha"] = rep.alpha;
    r["mode"] = to_string(rep.mode);
    r["weighted"] = rep.weighted;
    r["r"] = rep.r;
    r["reps"] = rep.reps;
    r["bias_sq"] = rep.bias_sq;
    r["variance_trace"] = rep.variance_trace;
    r["mse"] = rep.mse;
    r["prediction_mse"] = rep.prediction_mse;
    if (rep.analytic_variance_trace) {
      r["analytic_variance_trace"] = *rep.analytic_variance_trace;
    } else {
      r["analytic_variance_trace"] = nullptr;
    }
    r["rank_deficient_count"] = rep.rank_deficient_count;
    if (rep.bias_sq_wls) r["bias_sq_wls"] = *rep.bias_sq_wls;
    r["mean_estimate"] = vec(rep.mean_estimate);
    r["coord_variance"] = vec(rep.coord_variance);
    reports.push_back(std::move(r));
  }
  j["reports"] = reports;
  return j.dump(2);
}

void write_run_outputs(const RunRecord& record, const ExperimentConfig& config,
                       const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create '" + dir.string() + "': " + ec.message());
  auto open = [&](const char* name) {
    std::ofstream out(dir / name, std::ios::trunc);
    if (!out) throw IoError("cannot write '" + (dir / name).string() + "'");
    return out;
  };
  {
    auto out = open("report.csv");
    write_report_csv(out, record.reports);
  }
  {
    auto out = open("report_coords.csv");
    write_report_coords_csv(out, record.reports);
  }
  {
    auto out = open("run_record.json");
    out << run_record_json(record, config) << '\n';
  }
}

void write_estimates_header(std::ostream& out, Index p) {
  out << "scheme,alpha,r,seed,trial,rank,rank_deficient";
  for (Index k = 0; k < p; ++k) out << ",beta_" << k;
  out << '\n';
}

void write_estimate_row(std::ostream& out, std::string_view scheme, double alpha, Index r,
                        Seed seed, Index trial, const SubsampleEstimate& est) {
  out << scheme << ',' << format_double(alpha) << ',' << r << ',' << seed << ',' << trial << ','
      << est.subproblem_rank << ',' << (est.rank_deficient ? 1 : 0);
  for (Index k = 0; k < est.beta_tilde.size(); ++k) out << ',' << format_double(est.beta_tilde(k));
  out << '\n';
}

void write_timing_csv(std::ostream& out, const std::vector<TimingRow>& rows) {
  out << "n,p,method,r1,r2,median_seconds\n";
  for (const TimingRow& row : rows) {
    out << row.n << ',' << row.p << ',' << row.method << ',' << row.r1 << ',' << row.r2 << ','
        << format_double(row.median_seconds) << '\n';
  }
}

}  // namespace levsample
