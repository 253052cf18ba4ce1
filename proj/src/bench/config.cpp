#include "stiefel/bench/config.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include <json.hpp>

#include "stiefel/bench/csv.hpp"
#include "stiefel/errors.hpp"

namespace stiefel::bench {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw ConfigError(where + ": " + what);
}

void check_keys(const json& obj, const std::string& where, std::initializer_list<std::string_view> allowed) {
  for (const auto& [key, _] : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) fail(where + "." + key, "unknown key");
  }
}

std::size_t get_count(const json& v, const std::string& where) {
  if (!v.is_number_integer() || v.get<long long>() < 0) fail(where, "expected a non-negative integer");
  return v.get<std::size_t>();
}

double get_real(const json& v, const std::string& where) {
  if (!v.is_number()) fail(where, "expected a number");
  return v.get<double>();
}

bool get_bool(const json& v, const std::string& where) {
  if (!v.is_boolean()) fail(where, "expected true or false");
  return v.get<bool>();
}

std::string get_string(const json& v, const std::string& where) {
  if (!v.is_string()) fail(where, "expected a string");
  return v.get<std::string>();
}

std::vector<double> get_reals(const json& v, const std::string& where) {
  if (!v.is_array()) fail(where, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(get_real(v[i], where + "[" + std::to_string(i) + "]"));
  return out;
}

// A count or a list of counts.
std::vector<std::size_t> get_count_list(const json& v, const std::string& where) {
  if (v.is_array()) {
    if (v.empty()) fail(where, "empty list");
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < v.size(); ++i) out.push_back(get_count(v[i], where + "[" + std::to_string(i) + "]"));
    return out;
  }
  return {get_count(v, where)};
}

std::vector<Kind> get_kinds(const json& v, const std::string& where, bool& explicit_list) {
  if (v.is_string() && v.get<std::string>() == "all") {
    explicit_list = false;
    return {std::begin(kAllKinds), std::end(kAllKinds)};
  }
  if (!v.is_array() || v.empty()) fail(where, "expected \"all\" or a non-empty list of parameterization names");
  explicit_list = true;
  std::vector<Kind> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const std::string name = get_string(v[i], where + "[" + std::to_string(i) + "]");
    try {
      out.push_back(parse_kind(name));
    } catch (const PreconditionError&) {
      fail(where + "[" + std::to_string(i) + "]", "unknown parameterization '" + name + "'");
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

SamplerConfig parse_sampler(const json& s) {
  const std::string w = "sampler";
  if (!s.is_object()) fail(w, "expected an object");
  check_keys(s, w,
             {"iters_total", "iters_keep", "target_accept", "max_treedepth", "mass_adaptation", "sampling",
              "max_energy_error", "init_scale", "initial_step"});
  SamplerConfig c;
  if (s.contains("iters_total")) c.iters_total = get_count(s["iters_total"], w + ".iters_total");
  if (s.contains("iters_keep")) c.iters_keep = get_count(s["iters_keep"], w + ".iters_keep");
  if (s.contains("target_accept")) c.target_accept = get_real(s["target_accept"], w + ".target_accept");
  if (s.contains("max_treedepth"))
    c.max_treedepth = static_cast<int>(get_count(s["max_treedepth"], w + ".max_treedepth"));
  if (s.contains("mass_adaptation")) c.mass_adaptation = get_bool(s["mass_adaptation"], w + ".mass_adaptation");
  if (s.contains("sampling")) {
    const std::string m = get_string(s["sampling"], w + ".sampling");
    if (m == "multinomial") {
      c.sampling = TrajectorySampling::Multinomial;
    } else if (m == "slice") {
      c.sampling = TrajectorySampling::Slice;
    } else {
      fail(w + ".sampling", "expected \"multinomial\" or \"slice\"");
    }
  }
  if (s.contains("max_energy_error")) c.max_energy_error = get_real(s["max_energy_error"], w + ".max_energy_error");
  if (s.contains("init_scale")) c.init_scale = get_real(s["init_scale"], w + ".init_scale");
  if (s.contains("initial_step")) c.initial_step = get_real(s["initial_step"], w + ".initial_step");
  try {
    c.validate();
  } catch (const PreconditionError& e) {
    fail(w, e.what());
  }
  return c;
}

void parse_problem_entry(const json& p, std::size_t index, const json* default_kinds, std::vector<ProblemConfig>& out) {
  const std::string w = "problems[" + std::to_string(index) + "]";
  if (!p.is_object()) fail(w, "expected an object");
  check_keys(p, w,
             {"problem", "J", "K", "N", "T", "synthetic", "kinds", "data", "covariates", "missing_token", "lambda",
              "sigma", "mu", "beta", "missing_fraction", "with_mean", "ordered_lambda", "eta"});
  if (!p.contains("problem")) fail(w + ".problem", "required key is missing");
  ProblemConfig base;
  const std::string pname = get_string(p["problem"], w + ".problem");
  try {
    base.kind = parse_problem(pname);
  } catch (const ConfigError&) {
    fail(w + ".problem", "unknown problem '" + pname + "'");
  }

  if (p.contains("data")) base.data_path = get_string(p["data"], w + ".data");
  if (p.contains("missing_token")) base.missing_token = get_string(p["missing_token"], w + ".missing_token");
  if (p.contains("lambda")) base.lambda = get_reals(p["lambda"], w + ".lambda");
  if (p.contains("sigma")) {
    base.sigma = get_real(p["sigma"], w + ".sigma");
    if (!(base.sigma > 0.0)) fail(w + ".sigma", "must be positive");
  }
  if (p.contains("mu")) base.mu = get_real(p["mu"], w + ".mu");
  if (p.contains("beta")) base.beta = get_real(p["beta"], w + ".beta");
  if (p.contains("missing_fraction")) {
    base.missing_fraction = get_real(p["missing_fraction"], w + ".missing_fraction");
    if (!(base.missing_fraction >= 0.0 && base.missing_fraction < 1.0)) fail(w + ".missing_fraction", "must be in [0, 1)");
  }
  if (p.contains("with_mean")) base.with_mean = get_bool(p["with_mean"], w + ".with_mean");
  if (p.contains("ordered_lambda")) base.ordered_lambda = get_bool(p["ordered_lambda"], w + ".ordered_lambda");
  if (p.contains("eta")) {
    base.eta = get_real(p["eta"], w + ".eta");
    if (!(base.eta > 0.0)) fail(w + ".eta", "must be positive");
  }
  if (p.contains("covariates")) {
    const json& c = p["covariates"];
    if (c.is_array()) {
      for (std::size_t i = 0; i < c.size(); ++i)
        base.covariate_paths.push_back(get_string(c[i], w + ".covariates[" + std::to_string(i) + "]"));
      base.covariates = base.covariate_paths.size();
    } else {
      base.covariates = get_count(c, w + ".covariates");
    }
  }

  bool explicit_kinds = false;
  if (p.contains("kinds")) {
    base.kinds = get_kinds(p["kinds"], w + ".kinds", explicit_kinds);
  } else if (default_kinds != nullptr) {
    base.kinds = get_kinds(*default_kinds, "kinds", explicit_kinds);
  } else {
    base.kinds = {std::begin(kAllKinds), std::end(kAllKinds)};
  }

  const bool has_data = !base.data_path.empty();
  std::vector<std::size_t> Js{0};
  std::vector<std::size_t> Ks;
  std::vector<std::size_t> Ts{0};

  if (base.kind == ProblemKind::Ppca && p.contains("synthetic")) {
    const std::size_t which = get_count(p["synthetic"], w + ".synthetic");
    if (which != 1 && which != 2) fail(w + ".synthetic", "expected 1 or 2");
    const bool one = which == 1;
    Js = {one ? 5u : 50u};
    Ks = {one ? 2u : 3u};
    Ts = {one ? 150u : 100u};
    if (base.lambda.empty()) base.lambda = one ? std::vector<double>{9.0, 1.0} : std::vector<double>{5.0, 3.0, 1.5};
    if (base.sigma == 0.0) base.sigma = one ? 0.01 : 1.0;
    for (const char* key : {"J", "K", "N"})
      if (p.contains(key)) fail(w + "." + key, "fixed by 'synthetic'");
  } else {
    if (p.contains("J")) {
      Js = get_count_list(p["J"], w + ".J");
    } else if (!has_data || base.kind == ProblemKind::Uniform) {
      fail(w + ".J", "required key is missing");
    }
    if (!p.contains("K")) fail(w + ".K", "required key is missing");
    Ks = get_count_list(p["K"], w + ".K");
    const char* tkey = base.kind == ProblemKind::Ppca ? "N" : "T";
    const char* other = base.kind == ProblemKind::Ppca ? "T" : "N";
    if (p.contains(other)) fail(w + "." + other, "not used by problem '" + pname + "'");
    if (base.kind == ProblemKind::Ppca || base.kind == ProblemKind::MatrixCompletion) {
      if (p.contains(tkey)) {
        Ts = get_count_list(p[tkey], w + "." + tkey);
      } else if (!has_data) {
        if (base.kind == ProblemKind::Ppca) {
          Ts = {150};
        } else {
          fail(w + ".T", "required key is missing");
        }
      }
    } else if (p.contains(tkey)) {
      fail(w + "." + tkey, "not used by problem '" + pname + "'");
    }
  }
  if (p.contains("synthetic") && base.kind != ProblemKind::Ppca) fail(w + ".synthetic", "only ppca has presets");
  if (base.kind == ProblemKind::Uniform && has_data) fail(w + ".data", "the uniform problem takes no data");
  if (base.kind != ProblemKind::MatrixCompletion && p.contains("covariates"))
    fail(w + ".covariates", "only matrix_completion takes covariates");

  for (std::size_t J : Js) {
    for (std::size_t K : Ks) {
      for (std::size_t T : Ts) {
        ProblemConfig pc = base;
        pc.J = J;
        pc.K = K;
        pc.T = T;
        if (K == 0) fail(w + ".K", "must be at least 1");
        if (J != 0 && K > J) fail(w + ".K", "K = " + std::to_string(K) + " exceeds J = " + std::to_string(J));
        if (base.kind == ProblemKind::MatrixCompletion && T != 0 && K > T)
          fail(w + ".K", "K = " + std::to_string(K) + " exceeds T = " + std::to_string(T));
        if (!pc.lambda.empty() && pc.lambda.size() != K)
          fail(w + ".lambda", "expected " + std::to_string(K) + " values");
        if (J != 0 && J == K) {
          const bool has_cayley = std::find(pc.kinds.begin(), pc.kinds.end(), Kind::Cayley) != pc.kinds.end();
          if (has_cayley && explicit_kinds) {
            fail(w + ".kinds", "cayley is excluded for square frames (J = K = " + std::to_string(J) +
                                   "); the square Cayley case is not supported");
          }
          std::erase(pc.kinds, Kind::Cayley);
        }
        if (pc.kinds.empty()) fail(w + ".kinds", "no parameterization left to run");
        out.push_back(std::move(pc));
      }
    }
  }
}

}  // namespace

std::string_view problem_name(ProblemKind kind) {
  switch (kind) {
    case ProblemKind::Uniform: return "uniform";
    case ProblemKind::Ppca: return "ppca";
    case ProblemKind::Eigenmodel: return "eigenmodel";
    case ProblemKind::MatrixCompletion: return "matrix_completion";
  }
  return "?";
}

ProblemKind parse_problem(std::string_view name) {
  for (ProblemKind k : {ProblemKind::Uniform, ProblemKind::Ppca, ProblemKind::Eigenmodel, ProblemKind::MatrixCompletion})
    if (problem_name(k) == name) return k;
  throw ConfigError("unknown problem '" + std::string(name) + "'");
}

std::string ProblemConfig::label() const {
  return std::string(problem_name(kind)) + ":J=" + std::to_string(J) + ":K=" + std::to_string(K) +
         ":T=" + std::to_string(T);
}

std::size_t BenchConfig::total_runs() const {
  std::size_t n = 0;
  for (const auto& p : problems) n += p.kinds.size() * runs;
  return n;
}

BenchConfig parse_config(std::string_view json_text) {
  json root;
  try {
    root = json::parse(json_text, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: not valid JSON: ") + e.what());
  }
  if (!root.is_object()) fail("config", "expected a JSON object");
  check_keys(root, "config",
             {"problems", "kinds", "runs", "base_seed", "sampler", "foi", "regenerate_data", "output", "workers"});

  BenchConfig cfg;
  if (root.contains("runs")) {
    cfg.runs = get_count(root["runs"], "runs");
    if (cfg.runs < 1) fail("runs", "must be at least 1");
  }
  if (root.contains("base_seed")) {
    const json& s = root["base_seed"];
    if (!s.is_number_integer() && !s.is_number_unsigned()) fail("base_seed", "expected an integer");
    cfg.base_seed = s.is_number_unsigned() ? s.get<std::uint64_t>() : static_cast<std::uint64_t>(s.get<long long>());
  }
  if (root.contains("sampler")) cfg.sampler = parse_sampler(root["sampler"]);
  if (root.contains("foi")) {
    const std::string f = get_string(root["foi"], "foi");
    try {
      cfg.foi = parse_foi(f);
    } catch (const PreconditionError&) {
      fail("foi", "expected \"all\" or \"stiefel\"");
    }
  }
  if (root.contains("regenerate_data")) cfg.regenerate_data = get_bool(root["regenerate_data"], "regenerate_data");
  if (root.contains("output")) cfg.output = get_string(root["output"], "output");
  if (root.contains("workers")) cfg.workers = get_count(root["workers"], "workers");

  if (!root.contains("problems")) fail("problems", "required key is missing");
  const json& problems = root["problems"];
  if (!problems.is_array() || problems.empty()) fail("problems", "expected a non-empty array");
  const json* default_kinds = root.contains("kinds") ? &root["kinds"] : nullptr;
  if (default_kinds != nullptr) {
    bool ignored = false;
    get_kinds(*default_kinds, "kinds", ignored);
  }
  for (std::size_t i = 0; i < problems.size(); ++i) parse_problem_entry(problems[i], i, default_kinds, cfg.problems);

  std::set<std::string> labels;
  for (const auto& p : cfg.problems) {
    if (p.J == 0) continue;  // sizes read from data; checked when loaded
    if (!labels.insert(p.label()).second) fail("problems", "duplicate instance " + p.label());
  }
  return cfg;
}

BenchConfig load_config(const std::string& path) {
  std::string text;
  try {
    text = read_text_file(path);
  } catch (const IoError& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return parse_config(text);
}

std::string config_reference() {
  std::ostringstream os;
  os << "| key | default | meaning |\n"
     << "|---|---|---|\n"
     << "| problems | (required) | list of problem entries, see below |\n"
     << "| kinds | \"all\" | \"all\" or a list of polar, householder, cayley, givens; per-problem `kinds` overrides |\n"
     << "| runs | 8 | runs per (problem, kind) |\n"
     << "| base_seed | 1 | base of every run and dataset seed |\n"
     << "| foi | \"all\" | ESS over frame entries plus auxiliary values (\"all\") or frame entries only (\"stiefel\") |\n"
     << "| regenerate_data | false | draw a fresh synthetic dataset for every run instead of one per problem |\n"
     << "| output | \"records.csv\" | records file name inside the output directory |\n"
     << "| workers | 0 | concurrent runs; 0 uses the OpenMP default |\n"
     << "| sampler.iters_total | 1000 | warmup plus kept iterations |\n"
     << "| sampler.iters_keep | 500 | kept draws; minESS/iter divides by this |\n"
     << "| sampler.target_accept | 0.8 | dual-averaging target |\n"
     << "| sampler.max_treedepth | 10 | maximum number of trajectory doublings |\n"
     << "| sampler.mass_adaptation | true | adapt a diagonal metric during warmup |\n"
     << "| sampler.sampling | \"multinomial\" | \"multinomial\" or \"slice\" trajectory sampling |\n"
     << "| sampler.max_energy_error | 1000 | energy error marking a divergence |\n"
     << "| sampler.init_scale | 0.1 | initial point is init_scale * N(0, I) |\n"
     << "| sampler.initial_step | 0 | fixed first step size; 0 runs the heuristic |\n"
     << "\n"
     << "Problem entries (`problem` is one of uniform, ppca, eigenmodel, matrix_completion):\n\n"
     << "| key | problems | default | meaning |\n"
     << "|---|---|---|---|\n"
     << "| J, K | all | required (J may come from `data`) | frame size; a list expands into a grid |\n"
     << "| N | ppca | 150 | observations |\n"
     << "| T | matrix_completion | required without data | panel length |\n"
     << "| synthetic | ppca | none | 1: N=150, J=5, K=2, lambda=(9,1), sigma=0.01; 2: N=100, J=50, K=3, "
        "lambda=(5,3,1.5), sigma=1 |\n"
     << "| data | ppca, eigenmodel, matrix_completion | none | CSV file; otherwise data are synthetic |\n"
     << "| covariates | matrix_completion | 1 | covariate count for synthetic data, or a list of CSV paths |\n"
     << "| missing_token | matrix_completion | \"NA\" | marks unobserved cells in `data` |\n"
     << "| lambda | ppca, eigenmodel, matrix_completion | generator default | true scales for synthetic data |\n"
     << "| sigma | ppca, matrix_completion | 0.01 / 0.5 | noise sd for synthetic data |\n"
     << "| mu | eigenmodel | -1 | intercept for synthetic graphs |\n"
     << "| beta | matrix_completion | 1 | covariate effect for synthetic data |\n"
     << "| missing_fraction | matrix_completion | 0.1 | masked share of synthetic cells |\n"
     << "| with_mean | ppca | false | sample a mean vector |\n"
     << "| ordered_lambda | ppca | true | constrain lambda to be decreasing |\n"
     << "| eta | matrix_completion | 0.1 | rate of the exponential prior on lambda |\n";
  return os.str();
}

}  // namespace stiefel::bench
