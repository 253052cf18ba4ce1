#include "stiefel/bench/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include <omp.h>

#include "stiefel/bench/csv.hpp"
#include "stiefel/bench/synth.hpp"
#include "stiefel/errors.hpp"
#include "stiefel/ess.hpp"
#include "stiefel/models.hpp"
#include "stiefel/rng.hpp"

namespace stiefel::bench {

namespace {

constexpr std::uint64_t kDataStream = 0xDA7A;
constexpr std::size_t kColumns = 16;

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t c = line.find(',', start);
    out.push_back(line.substr(start, c == std::string_view::npos ? std::string_view::npos : c - start));
    if (c == std::string_view::npos) break;
    start = c + 1;
  }
  return out;
}

template <class T>
T parse_integer(std::string_view s, std::size_t line) {
  T v{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw IoError("records line " + std::to_string(line) + ": bad integer '" + std::string(s) + "'");
  return v;
}

double parse_real(std::string_view s, std::size_t line) {
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw IoError("records line " + std::to_string(line) + ": bad number '" + std::string(s) + "'");
  return v;
}

std::vector<double> default_scales(std::size_t K, double top, double ratio) {
  std::vector<double> out(K);
  for (std::size_t k = 0; k < K; ++k) out[k] = top * std::pow(ratio, static_cast<double>(k));
  return out;
}

Matrix load_square_graph(const ProblemConfig& p) {
  const CsvMatrix csv = load_csv_matrix(p.data_path, p.missing_token);
  if (csv.any_missing()) throw IoError(p.data_path + ": adjacency matrix has missing cells");
  if (csv.values.rows() != csv.values.cols()) throw IoError(p.data_path + ": adjacency matrix is not square");
  return csv.values;
}

McData load_panel(const ProblemConfig& p) {
  const CsvMatrix csv = load_csv_matrix(p.data_path, p.missing_token);
  McData d;
  d.y = csv.values;
  d.missing = csv.missing;
  d.K = p.K;
  d.eta = p.eta;
  for (const auto& path : p.covariate_paths) {
    const CsvMatrix x = load_csv_matrix(path, p.missing_token);
    if (x.any_missing()) throw IoError(path + ": covariates may not have missing cells");
    if (x.values.rows() != d.y.rows() || x.values.cols() != d.y.cols())
      throw IoError(path + ": covariate shape differs from the panel");
    d.covariates.push_back(x.values);
  }
  return d;
}

}  // namespace

RunKey key_of(const RunRecord& r) { return {r.problem, r.J, r.K, r.T, r.kind, r.run_index}; }

std::string_view record_header() {
  return "problem,J,K,T,kind,run_index,seed,iters_total,iters_kept,elapsed_seconds,min_ess,min_ess_per_iter,"
         "min_ess_per_sec,divergences,stuck,failed";
}

std::string format_record(const RunRecord& r) {
  std::ostringstream os;
  os << r.problem << ',' << r.J << ',' << r.K << ',' << r.T << ',' << kind_name(r.kind) << ',' << r.run_index << ','
     << r.seed << ',' << r.iters_total << ',' << r.iters_kept << ',' << format_double(r.elapsed_seconds) << ','
     << format_double(r.min_ess) << ',' << format_double(r.min_ess_per_iter) << ','
     << format_double(r.min_ess_per_sec) << ',' << r.divergences << ',' << (r.stuck ? 1 : 0) << ','
     << (r.failed ? 1 : 0);
  return os.str();
}

std::vector<RunRecord> parse_records(std::string_view text) {
  std::vector<RunRecord> out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  bool header_seen = false;
  while (pos < text.size()) {
    const std::size_t nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() : nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    if (!header_seen) {
      if (line != record_header()) throw IoError("records line 1: unexpected header");
      header_seen = true;
      continue;
    }
    const auto c = split(line);
    if (c.size() != kColumns)
      throw IoError("records line " + std::to_string(line_no) + ": expected " + std::to_string(kColumns) + " fields");
    RunRecord r;
    r.problem = std::string(c[0]);
    r.J = parse_integer<std::size_t>(c[1], line_no);
    r.K = parse_integer<std::size_t>(c[2], line_no);
    r.T = parse_integer<std::size_t>(c[3], line_no);
    try {
      r.kind = parse_kind(c[4]);
    } catch (const PreconditionError&) {
      throw IoError("records line " + std::to_string(line_no) + ": unknown kind '" + std::string(c[4]) + "'");
    }
    r.run_index = parse_integer<std::size_t>(c[5], line_no);
    r.seed = parse_integer<std::uint64_t>(c[6], line_no);
    r.iters_total = parse_integer<std::size_t>(c[7], line_no);
    r.iters_kept = parse_integer<std::size_t>(c[8], line_no);
    r.elapsed_seconds = parse_real(c[9], line_no);
    r.min_ess = parse_real(c[10], line_no);
    r.min_ess_per_iter = parse_real(c[11], line_no);
    r.min_ess_per_sec = parse_real(c[12], line_no);
    r.divergences = parse_integer<std::size_t>(c[13], line_no);
    r.stuck = parse_integer<int>(c[14], line_no) != 0;
    r.failed = parse_integer<int>(c[15], line_no) != 0;
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<RunRecord> read_records(const std::string& path) { return parse_records(read_text_file(path)); }

void write_records(const std::string& path, std::vector<RunRecord> records) {
  std::sort(records.begin(), records.end(), [](const RunRecord& a, const RunRecord& b) { return key_of(a) < key_of(b); });
  std::ostringstream os;
  os << record_header() << '\n';
  for (const auto& r : records) os << format_record(r) << '\n';
  write_text_file(path, os.str());
}

std::shared_ptr<const TargetModel> build_model(const ProblemConfig& p, std::uint64_t seed) {
  switch (p.kind) {
    case ProblemKind::Uniform:
      return std::make_shared<UniformModel>(p.J, p.K);
    case ProblemKind::Ppca: {
      PpcaData d;
      if (!p.data_path.empty()) {
        const CsvMatrix csv = load_csv_matrix(p.data_path, p.missing_token);
        if (csv.any_missing()) throw IoError(p.data_path + ": ppca data may not have missing cells");
        d.y = csv.values;
      } else {
        PpcaSynthSpec s;
        s.N = p.T;
        s.J = p.J;
        s.K = p.K;
        s.lambda = p.lambda.empty() ? default_scales(p.K, 9.0, 1.0 / 3.0) : p.lambda;
        s.sigma = p.sigma > 0.0 ? p.sigma : 0.01;
        s.with_mean = p.with_mean;
        d = synth_ppca(s, seed).data;
      }
      d.K = p.K;
      d.with_mean = p.with_mean;
      d.ordered_lambda = p.ordered_lambda;
      return std::make_shared<PpcaModel>(std::move(d));
    }
    case ProblemKind::Eigenmodel: {
      if (!p.data_path.empty()) return std::make_shared<EigenmodelModel>(EigenmodelData{load_square_graph(p), p.K});
      EigenSynthSpec s;
      s.J = p.J;
      s.K = p.K;
      s.lambda = p.lambda;
      s.mu = p.mu;
      return std::make_shared<EigenmodelModel>(synth_eigenmodel(s, seed).data);
    }
    case ProblemKind::MatrixCompletion: {
      if (!p.data_path.empty()) return std::make_shared<MatrixCompletionModel>(load_panel(p));
      McSynthSpec s;
      s.J = p.J;
      s.T = p.T;
      s.K = p.K;
      if (!p.lambda.empty()) {
        s.lambda = p.lambda;
      } else if (p.K != s.lambda.size()) {
        s.lambda = default_scales(p.K, 40.0, 0.6);
      }
      if (p.sigma > 0.0) s.sigma = p.sigma;
      s.covariates = p.covariates;
      s.beta = p.beta;
      s.missing_fraction = p.missing_fraction;
      s.eta = p.eta;
      return std::make_shared<MatrixCompletionModel>(synth_matrix_completion(s, seed).data);
    }
  }
  throw ConfigError("unknown problem kind");
}

std::uint64_t run_seed(std::uint64_t base_seed, const ProblemConfig& p, Kind kind, std::size_t run_index) {
  return mix_seed(base_seed, {fnv1a(p.label()), static_cast<std::uint64_t>(kind), run_index});
}

std::uint64_t data_seed(std::uint64_t base_seed, const ProblemConfig& p, std::optional<std::size_t> run_index) {
  if (run_index) return mix_seed(base_seed, {fnv1a(p.label()), kDataStream, *run_index});
  return mix_seed(base_seed, {fnv1a(p.label()), kDataStream});
}

std::vector<PreparedProblem> prepare_problems(const BenchConfig& cfg, const ModelFactory& factory) {
  const ModelFactory build = factory ? factory : ModelFactory(build_model);
  std::vector<PreparedProblem> out;
  std::map<std::string, std::size_t> seen;
  for (const auto& pc : cfg.problems) {
    PreparedProblem pp{pc, nullptr};
    if (!pc.data_path.empty()) {
      pp.model = build(pc, 0);
      const auto blocks = pp.model->stiefel_blocks();
      pp.cfg.J = blocks.at(0).J;
      if (pc.kind == ProblemKind::MatrixCompletion) pp.cfg.T = blocks.at(1).J;
      if (pc.kind == ProblemKind::Ppca) pp.cfg.T = static_cast<const PpcaModel&>(*pp.model).data().y.rows();
      if (pc.J != 0 && pc.J != pp.cfg.J)
        throw ConfigError(pc.label() + ": J does not match " + pc.data_path + " (J = " + std::to_string(pp.cfg.J) + ")");
      if (pp.cfg.J == pp.cfg.K) std::erase(pp.cfg.kinds, Kind::Cayley);
    } else if (!cfg.regenerate_data) {
      pp.model = build(pc, data_seed(cfg.base_seed, pc, std::nullopt));
    }
    if (!seen.emplace(pp.cfg.label(), out.size()).second)
      throw ConfigError("problems: duplicate instance " + pp.cfg.label());
    out.push_back(std::move(pp));
  }
  return out;
}

RunRecord execute_run(const BenchConfig& cfg, const PreparedProblem& problem, Kind kind, std::size_t run_index,
                      std::string* error, const ModelFactory& factory) {
  const ProblemConfig& p = problem.cfg;
  RunRecord r;
  r.problem = std::string(problem_name(p.kind));
  r.J = p.J;
  r.K = p.K;
  r.T = p.T;
  r.kind = kind;
  r.run_index = run_index;
  r.seed = run_seed(cfg.base_seed, p, kind, run_index);
  r.iters_total = cfg.sampler.iters_total;
  r.iters_kept = cfg.sampler.iters_keep;
  try {
    std::shared_ptr<const TargetModel> model = problem.model;
    if (!model) model = (factory ? factory : ModelFactory(build_model))(p, data_seed(cfg.base_seed, p, run_index));
    const auto target = build_unconstrained(model, kind);
    SamplerConfig sc = cfg.sampler;
    sc.seed = r.seed;
    const ChainResult chain = sample(*target, sc);  // timed inside, sampling only
    const EssReport rep = min_ess_report(*target, chain.draws, chain.elapsed_seconds, sc.iters_keep, cfg.foi, false);
    r.elapsed_seconds = chain.elapsed_seconds;
    r.min_ess = rep.min_ess;
    r.min_ess_per_iter = rep.min_ess_per_iter;
    r.min_ess_per_sec = rep.min_ess_per_sec;
    r.divergences = chain.divergences;
    r.stuck = rep.stuck;
  } catch (const std::exception& e) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    r.elapsed_seconds = r.min_ess = r.min_ess_per_iter = r.min_ess_per_sec = nan;
    r.failed = true;
    if (error) *error = e.what();
  }
  return r;
}

ExperimentResult run_experiment(const BenchConfig& cfg, const RunOptions& options) {
  const std::vector<PreparedProblem> problems = prepare_problems(cfg, options.model_factory);

  struct Task {
    std::size_t problem;
    Kind kind;
    std::size_t run;
  };
  std::vector<RunRecord> existing;
  if (options.resume && !options.records_path.empty() && std::filesystem::exists(options.records_path))
    existing = read_records(options.records_path);
  std::map<RunKey, std::size_t> done;
  for (std::size_t i = 0; i < existing.size(); ++i) done[key_of(existing[i])] = i;

  std::vector<Task> pending;
  std::size_t grid_size = 0;
  ExperimentResult result;
  for (std::size_t pi = 0; pi < problems.size(); ++pi) {
    const ProblemConfig& p = problems[pi].cfg;
    for (Kind k : p.kinds) {
      for (std::size_t run = 0; run < cfg.runs; ++run) {
        ++grid_size;
        if (done.count({std::string(problem_name(p.kind)), p.J, p.K, p.T, k, run})) {
          ++result.skipped;
        } else {
          pending.push_back({pi, k, run});
        }
      }
    }
  }
  if (options.limit && pending.size() > *options.limit) pending.resize(*options.limit);

  // The file holds the previous records plus one appended line per finished run.
  std::ofstream out;
  if (!options.records_path.empty()) {
    write_records(options.records_path, existing);
    out.open(options.records_path, std::ios::app);
    if (!out) throw IoError("cannot append to " + options.records_path);
  }

  std::vector<RunRecord> fresh(pending.size());
  std::vector<std::string> errors(pending.size());
  bool write_failed = false;
  const std::size_t workers = options.workers ? options.workers : cfg.workers;
  const int threads = workers ? static_cast<int>(workers) : omp_get_max_threads();
  const long long n = static_cast<long long>(pending.size());
#pragma omp parallel for num_threads(threads) schedule(dynamic, 1)
  for (long long i = 0; i < n; ++i) {
    const Task& t = pending[static_cast<std::size_t>(i)];
    fresh[i] = execute_run(cfg, problems[t.problem], t.kind, t.run, &errors[i], options.model_factory);
#pragma omp critical(stiefel_records_writer)
    {
      if (out.is_open()) {
        out << format_record(fresh[i]) << '\n';
        out.flush();
        if (!out) write_failed = true;
      }
      if (options.on_record) options.on_record(fresh[i], errors[i]);
    }
  }
  if (write_failed) throw IoError("error appending to " + options.records_path);
  out.close();

  result.records = std::move(existing);
  result.records.insert(result.records.end(), fresh.begin(), fresh.end());
  std::sort(result.records.begin(), result.records.end(),
            [](const RunRecord& a, const RunRecord& b) { return key_of(a) < key_of(b); });
  if (!options.records_path.empty()) write_records(options.records_path, result.records);
  result.executed = fresh.size();
  result.failed = static_cast<std::size_t>(
      std::count_if(result.records.begin(), result.records.end(), [](const RunRecord& r) { return r.failed; }));
  result.complete = result.skipped + result.executed == grid_size;
  return result;
}

}  // namespace stiefel::bench
