#pragma once

#include "cadence/clustering.hpp"
#include "cadence/corcondia.hpp"
#include "cadence/demographics.hpp"
#include "cadence/factor_model.hpp"
#include "cadence/ingest.hpp"
#include "cadence/io.hpp"
#include "cadence/parafac.hpp"
#include "cadence/stats.hpp"
#include "cadence/synthetic.hpp"

#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace cadence {

inline constexpr const char* kVersion = "0.1.0";

using Json = nlohmann::ordered_json;

inline void log_info(const std::string& msg) {
  std::fprintf(stderr, "[info] %s\n", msg.c_str());
}
inline void log_warn(const std::string& msg) {
  std::fprintf(stderr, "[warn] %s\n", msg.c_str());
}
inline void log_error(const std::string& msg) {
  std::fprintf(stderr, "[error] %s\n", msg.c_str());
}

/// One configuration drives every subcommand; all artifacts land in
/// output_dir so each stage can restart from the previous stage's files.
struct PipelineConfig {
  std::string receipts_path;
  std::string demographics_path;
  bool use_synthetic = false;
  SyntheticSpec synthetic;

  CalendarConfig calendar{Date{2017, 4, 1}, Date{2018, 1, 21}, 0, false};

  int rank = 3;
  int max_iterations = 500;
  double tolerance = 1e-8;
  int n_runs = 20;

  int scan_r_min = 1;
  int scan_r_max = 6;
  double cc_threshold = 85.0;

  std::string cluster_method = "kmedoids";
  int k = 5;
  int k_min = 2;
  int k_max = 10;
  int cluster_restarts = 5;

  double representative_fraction = 0.10;

  std::string output_dir;
  std::uint64_t seed = 42;
  int threads = 1;
};

namespace detail {

inline const char* noise_kind_name(NoiseKind k) {
  switch (k) {
    case NoiseKind::None: return "none";
    case NoiseKind::Poisson: return "poisson";
    case NoiseKind::Gaussian: return "gaussian";
  }
  return "none";
}

inline NoiseKind parse_noise_kind(const std::string& s) {
  if (s == "none") return NoiseKind::None;
  if (s == "poisson") return NoiseKind::Poisson;
  if (s == "gaussian") return NoiseKind::Gaussian;
  throw std::invalid_argument("unknown noise kind: " + s);
}

inline const char* day_template_name(DayTemplate t) {
  switch (t) {
    case DayTemplate::Weekdays: return "weekdays";
    case DayTemplate::Saturday: return "saturday";
    case DayTemplate::Sunday: return "sunday";
  }
  return "weekdays";
}

inline DayTemplate parse_day_template(const std::string& s) {
  if (s == "weekdays") return DayTemplate::Weekdays;
  if (s == "saturday") return DayTemplate::Saturday;
  if (s == "sunday") return DayTemplate::Sunday;
  throw std::invalid_argument("unknown day template: " + s);
}

inline Date parse_date_or_throw(const std::string& s) {
  const auto d = parse_date(s);
  if (!d) throw std::invalid_argument("invalid date: '" + s + "'");
  return *d;
}

}  // namespace detail

inline Json synthetic_to_json(const SyntheticSpec& s) {
  Json j;
  j["users"] = s.users;
  j["weeks"] = s.weeks;
  j["rank"] = s.rank;
  Json templates = Json::array();
  for (DayTemplate t : s.day_templates)
    templates.push_back(detail::day_template_name(t));
  j["day_templates"] = templates;
  j["weekly_levels"] = s.weekly_levels;
  j["groups"] = s.groups;
  j["membership_noise"] = s.membership_noise;
  j["activity_scale"] = s.activity_scale;
  j["demographic_coupling"] = s.demographic_coupling;
  j["noise"] = detail::noise_kind_name(s.noise);
  j["noise_level"] = s.noise_level;
  return j;
}

inline SyntheticSpec synthetic_from_json(const Json& j) {
  SyntheticSpec s;
  s.users = j.value("users", s.users);
  s.weeks = j.value("weeks", s.weeks);
  s.rank = j.value("rank", s.rank);
  if (j.contains("day_templates"))
    for (const auto& t : j.at("day_templates"))
      s.day_templates.push_back(detail::parse_day_template(t.get<std::string>()));
  if (j.contains("weekly_levels"))
    s.weekly_levels = j.at("weekly_levels").get<std::vector<double>>();
  s.groups = j.value("groups", s.groups);
  s.membership_noise = j.value("membership_noise", s.membership_noise);
  s.activity_scale = j.value("activity_scale", s.activity_scale);
  s.demographic_coupling = j.value("demographic_coupling", s.demographic_coupling);
  if (j.contains("noise"))
    s.noise = detail::parse_noise_kind(j.at("noise").get<std::string>());
  s.noise_level = j.value("noise_level", s.noise_level);
  return s;
}

inline Json config_to_json(const PipelineConfig& c) {
  Json j;
  j["inputs"]["receipts"] = c.receipts_path;
  j["inputs"]["demographics"] = c.demographics_path;
  j["inputs"]["synthetic"] = c.use_synthetic ? synthetic_to_json(c.synthetic) : Json();
  j["calendar"]["start"] = format_date(c.calendar.start);
  j["calendar"]["end"] = format_date(c.calendar.end);
  j["calendar"]["week_start"] = c.calendar.week_start;
  j["calendar"]["include_partial_weeks"] = c.calendar.include_partial_weeks;
  j["fit"]["rank"] = c.rank;
  j["fit"]["max_iterations"] = c.max_iterations;
  j["fit"]["tolerance"] = c.tolerance;
  j["n_runs"] = c.n_runs;
  j["rank_scan"]["r_min"] = c.scan_r_min;
  j["rank_scan"]["r_max"] = c.scan_r_max;
  j["rank_scan"]["threshold"] = c.cc_threshold;
  j["clustering"]["method"] = c.cluster_method;
  j["clustering"]["k"] = c.k;
  j["clustering"]["k_min"] = c.k_min;
  j["clustering"]["k_max"] = c.k_max;
  j["clustering"]["restarts"] = c.cluster_restarts;
  j["stats"]["representative_fraction"] = c.representative_fraction;
  j["output_dir"] = c.output_dir;
  j["seed"] = c.seed;
  j["threads"] = c.threads;
  return j;
}

inline PipelineConfig config_from_json(const Json& j) {
  PipelineConfig c;
  if (j.contains("inputs")) {
    const Json& in = j.at("inputs");
    c.receipts_path = in.value("receipts", c.receipts_path);
    c.demographics_path = in.value("demographics", c.demographics_path);
    if (in.contains("synthetic") && !in.at("synthetic").is_null()) {
      c.use_synthetic = true;
      c.synthetic = synthetic_from_json(in.at("synthetic"));
    }
  }
  if (j.contains("calendar")) {
    const Json& cal = j.at("calendar");
    if (cal.contains("start"))
      c.calendar.start = detail::parse_date_or_throw(cal.at("start").get<std::string>());
    if (cal.contains("end"))
      c.calendar.end = detail::parse_date_or_throw(cal.at("end").get<std::string>());
    c.calendar.week_start = cal.value("week_start", c.calendar.week_start);
    c.calendar.include_partial_weeks =
        cal.value("include_partial_weeks", c.calendar.include_partial_weeks);
  }
  if (j.contains("fit")) {
    const Json& f = j.at("fit");
    c.rank = f.value("rank", c.rank);
    c.max_iterations = f.value("max_iterations", c.max_iterations);
    c.tolerance = f.value("tolerance", c.tolerance);
  }
  c.n_runs = j.value("n_runs", c.n_runs);
  if (j.contains("rank_scan")) {
    const Json& r = j.at("rank_scan");
    c.scan_r_min = r.value("r_min", c.scan_r_min);
    c.scan_r_max = r.value("r_max", c.scan_r_max);
    c.cc_threshold = r.value("threshold", c.cc_threshold);
  }
  if (j.contains("clustering")) {
    const Json& cl = j.at("clustering");
    c.cluster_method = cl.value("method", c.cluster_method);
    c.k = cl.value("k", c.k);
    c.k_min = cl.value("k_min", c.k_min);
    c.k_max = cl.value("k_max", c.k_max);
    c.cluster_restarts = cl.value("restarts", c.cluster_restarts);
  }
  if (j.contains("stats"))
    c.representative_fraction =
        j.at("stats").value("representative_fraction", c.representative_fraction);
  c.output_dir = j.value("output_dir", c.output_dir);
  c.seed = j.value("seed", c.seed);
  c.threads = j.value("threads", c.threads);
  if (c.output_dir.empty()) {
    const char* env = std::getenv("CADENCE_OUTPUT_DIR");
    c.output_dir = env && *env ? env : "cadence_out";
  }
  return c;
}

inline PipelineConfig load_config(const std::string& path) {
  return config_from_json(Json::parse(read_file(path)));
}

/// Applies a `key.path=value` override; the value is parsed as JSON when
/// possible and kept as a string otherwise.
inline void apply_override(Json& config, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0)
    throw std::invalid_argument("override must look like key.path=value: " +
                                assignment);
  const std::string path = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);
  Json value = Json::parse(raw, nullptr, false);
  if (value.is_discarded()) value = raw;

  Json* node = &config;
  std::size_t begin = 0;
  for (;;) {
    const std::size_t dot = path.find('.', begin);
    const std::string key = path.substr(begin, dot - begin);
    if (key.empty())
      throw std::invalid_argument("bad override key: " + path);
    if (dot == std::string::npos) {
      (*node)[key] = value;
      return;
    }
    node = &(*node)[key];
    begin = dot + 1;
  }
}

namespace detail {

inline std::string artifact(const PipelineConfig& c, const std::string& name) {
  return (std::filesystem::path(c.output_dir) / name).string();
}

inline void ensure_output_dir(const PipelineConfig& c) {
  std::filesystem::create_directories(c.output_dir);
}

inline void write_manifest(const PipelineConfig& c, const std::string& name,
                           const Json& manifest) {
  write_file(artifact(c, name), manifest.dump(2) + "\n");
}

inline void save_users_csv(const std::string& path,
                           const std::vector<std::string>& users) {
  auto out = open_output(path);
  out << "row,user_id\n";
  for (std::size_t i = 0; i < users.size(); ++i)
    out << i << ',' << csv_escape(users[i]) << '\n';
  if (!out) throw std::runtime_error("failed writing " + path);
}

inline std::vector<std::string> load_users_csv(const std::string& path) {
  auto in = open_input(path);
  CsvReader reader(in);
  std::vector<std::string> fields;
  if (!reader.next(fields) || fields != std::vector<std::string>{"row", "user_id"})
    throw std::runtime_error(path + ": expected header row,user_id");
  std::vector<std::string> users;
  while (reader.next(fields)) {
    if (fields.size() != 2 || std::stol(fields[0]) != static_cast<long>(users.size()))
      throw std::runtime_error(path + ": rows out of order");
    users.push_back(fields[1]);
  }
  return users;
}

inline void save_demographics_csv(const std::string& path,
                                  const DemographicTable& table) {
  auto out = open_output(path);
  out << "user_id,gender,age_cohort,marital,child\n";
  for (const DemographicRecord& r : table.records()) {
    out << csv_escape(r.user_id) << ',' << (r.gender == 0 ? "Female" : "Male")
        << ',' << (r.age_cohort + 1) << ','
        << (r.marital == 0 ? "Married" : "Unmarried") << ','
        << (r.child == 0 ? "No" : "Yes") << '\n';
  }
  if (!out) throw std::runtime_error("failed writing " + path);
}

inline void save_labels_csv(const std::string& path, const std::string& header,
                            const std::vector<std::string>& users,
                            const std::vector<int>& labels) {
  auto out = open_output(path);
  out << header << '\n';
  for (std::size_t i = 0; i < users.size(); ++i)
    out << csv_escape(users[i]) << ',' << labels[i] << '\n';
  if (!out) throw std::runtime_error("failed writing " + path);
}

inline std::pair<std::vector<std::string>, std::vector<int>> load_labels_csv(
    const std::string& path, const std::string& header) {
  auto in = open_input(path);
  CsvReader reader(in);
  std::vector<std::string> fields;
  std::vector<std::string> expected;
  {
    std::istringstream hs(header);
    std::string tok;
    while (std::getline(hs, tok, ',')) expected.push_back(tok);
  }
  if (!reader.next(fields) || fields != expected)
    throw std::runtime_error(path + ": expected header " + header);
  std::pair<std::vector<std::string>, std::vector<int>> out;
  while (reader.next(fields)) {
    if (fields.size() != 2) throw std::runtime_error(path + ": bad row");
    out.first.push_back(fields[0]);
    out.second.push_back(std::stoi(fields[1]));
  }
  return out;
}

inline FitConfig fit_config(const PipelineConfig& c) {
  FitConfig f;
  f.rank = c.rank;
  f.max_iterations = c.max_iterations;
  f.tolerance = c.tolerance;
  f.seed = c.seed;
  return f;
}

inline Json parse_report_json(const ParseReport& r) {
  Json j;
  j["rows_total"] = r.rows_total;
  j["rows_ok"] = r.rows_ok;
  j["rows_bad"] = r.rows_bad;
  j["errors"] = r.errors;
  return j;
}

}  // namespace detail

/// receipts CSV -> tensor.csv + users.csv. Row-level problems are reported
/// and skipped; unreadable input or an empty week grid is fatal.
inline Json run_ingest(const PipelineConfig& cfg) {
  if (cfg.receipts_path.empty())
    throw std::invalid_argument("ingest: inputs.receipts is not set");
  auto in = open_input(cfg.receipts_path);
  const ReceiptParseResult parsed = parse_receipts(in);
  for (const auto& e : parsed.report.errors) log_warn(cfg.receipts_path + " " + e);

  const TensorBuildResult built = build_tensor(parsed.records, cfg.calendar);
  detail::ensure_output_dir(cfg);
  save_tensor_csv(detail::artifact(cfg, "tensor.csv"), built.tensor);
  detail::save_users_csv(detail::artifact(cfg, "users.csv"), built.users);

  double mass = 0.0;
  for (double v : built.tensor.data()) mass += v;

  Json manifest;
  manifest["version"] = kVersion;
  manifest["config"] = config_to_json(cfg);
  manifest["inputs"]["receipts_hash"] = hash_file_hex(cfg.receipts_path);
  manifest["parse"] = detail::parse_report_json(parsed.report);
  manifest["tensor"]["users"] = built.tensor.dim0();
  manifest["tensor"]["days"] = built.tensor.dim1();
  manifest["tensor"]["weeks"] = built.tensor.dim2();
  manifest["tensor"]["total_mass"] = mass;
  manifest["tensor"]["first_week_start"] = format_date(built.first_week_start);
  manifest["records"]["included"] = built.included;
  manifest["records"]["out_of_window"] = built.out_of_window;
  manifest["records"]["outside_week_grid"] = built.outside_week_grid;
  detail::write_manifest(cfg, "ingest_manifest.json", manifest);

  std::cout << "included=" << built.included << " users=" << built.tensor.dim0()
            << " weeks=" << built.tensor.dim2() << " skipped_rows="
            << parsed.report.rows_bad << " out_of_window="
            << built.out_of_window + built.outside_week_grid << "\n";
  return manifest;
}

/// synthetic spec -> tensor.csv + ground truth + demographics.csv.
inline Json run_synth(const PipelineConfig& cfg) {
  if (!cfg.use_synthetic)
    throw std::invalid_argument("synth: inputs.synthetic is not set");
  SyntheticSpec spec = cfg.synthetic;
  spec.seed = cfg.seed;
  const SyntheticData data = generate_synthetic(spec);

  detail::ensure_output_dir(cfg);
  save_tensor_csv(detail::artifact(cfg, "tensor.csv"), data.tensor);
  detail::save_users_csv(detail::artifact(cfg, "users.csv"), data.user_ids);
  detail::save_demographics_csv(detail::artifact(cfg, "demographics.csv"),
                                data.demographics);
  save_matrix_csv(detail::artifact(cfg, "truth_users.csv"), data.truth.users);
  save_matrix_csv(detail::artifact(cfg, "truth_days.csv"), data.truth.days);
  save_matrix_csv(detail::artifact(cfg, "truth_weeks.csv"), data.truth.weeks);
  detail::save_labels_csv(detail::artifact(cfg, "labels_true.csv"),
                          "user_id,group", data.user_ids, data.labels);

  double mass = 0.0;
  for (double v : data.tensor.data()) mass += v;

  Json manifest;
  manifest["version"] = kVersion;
  manifest["config"] = config_to_json(cfg);
  manifest["spec"] = synthetic_to_json(spec);
  manifest["poisson_intensity"] = data.poisson_intensity;
  manifest["tensor"]["users"] = data.tensor.dim0();
  manifest["tensor"]["days"] = data.tensor.dim1();
  manifest["tensor"]["weeks"] = data.tensor.dim2();
  manifest["tensor"]["total_mass"] = mass;
  detail::write_manifest(cfg, "synth_manifest.json", manifest);

  std::cout << "users=" << data.tensor.dim0() << " weeks=" << data.tensor.dim2()
            << " groups=" << (spec.groups > 0 ? spec.groups : spec.rank) << "\n";
  return manifest;
}

/// tensor.csv -> normalized factor matrices, best of n_runs restarts.
inline Json run_fit(const PipelineConfig& cfg) {
  const DenseTensor3 t = load_tensor_csv(detail::artifact(cfg, "tensor.csv"));
  const MultiFitResult multi =
      fit_parafac_multi(t, detail::fit_config(cfg), cfg.n_runs, cfg.threads);
  const FactorModel model = normalize_components(multi.best.model);

  save_matrix_csv(detail::artifact(cfg, "factor_users.csv"), model.users);
  save_matrix_csv(detail::artifact(cfg, "factor_days.csv"), model.days);
  save_matrix_csv(detail::artifact(cfg, "factor_weeks.csv"), model.weeks);
  save_matrix_csv(detail::artifact(cfg, "factor_weights.csv"),
                  Matrix(model.weights));

  Json manifest;
  manifest["version"] = kVersion;
  manifest["config"] = config_to_json(cfg);
  manifest["rank"] = cfg.rank;
  manifest["n_runs"] = cfg.n_runs;
  manifest["best_seed"] = multi.best.seed;
  manifest["iterations"] = multi.best.iterations;
  manifest["converged"] = multi.best.converged;
  manifest["relative_error"] = multi.best.relative_error;
  manifest["objectives"] = multi.objectives;
  manifest["warnings"] = multi.best.warnings;
  detail::write_manifest(cfg, "fit_manifest.json", manifest);

  for (const auto& w : multi.best.warnings) log_warn("fit: " + w);
  std::cout << "rank=" << cfg.rank << " relative_error="
            << format_double(multi.best.relative_error)
            << " best_seed=" << multi.best.seed << "\n";
  return manifest;
}

/// tensor.csv -> consistency-vs-rank table and the selected rank.
inline Json run_ccscan(const PipelineConfig& cfg) {
  if (cfg.scan_r_min < 1 || cfg.scan_r_max < cfg.scan_r_min)
    throw std::invalid_argument("cc-scan: bad rank range");
  const DenseTensor3 t = load_tensor_csv(detail::artifact(cfg, "tensor.csv"));
  std::vector<int> ranks;
  for (int r = cfg.scan_r_min; r <= cfg.scan_r_max; ++r) ranks.push_back(r);

  const CcReport report = cc_scan(t, ranks, cfg.n_runs, detail::fit_config(cfg),
                                  cfg.cc_threshold, cfg.threads);

  {
    auto out = open_output(detail::artifact(cfg, "ccscan.csv"));
    out << "rank,mean_cc,ci_low,ci_high,n_runs,selected\n";
    for (const auto& s : report.per_rank) {
      out << s.rank << ',';
      if (!std::isnan(s.mean)) out << format_double(s.mean);
      out << ',';
      if (!std::isnan(s.ci_half_width))
        out << format_double(s.mean - s.ci_half_width);
      out << ',';
      if (!std::isnan(s.ci_half_width))
        out << format_double(s.mean + s.ci_half_width);
      out << ',' << (report.n_runs - s.failed_runs) << ','
          << (s.selected ? 1 : 0) << '\n';
    }
  }
  {
    auto out = open_output(detail::artifact(cfg, "ccscan_runs.csv"));
    out << "rank,run,seed,cc\n";
    for (const auto& s : report.per_rank)
      for (std::size_t run = 0; run < s.values.size(); ++run) {
        out << s.rank << ',' << run << ',' << (cfg.seed + run) << ',';
        if (!std::isnan(s.values[run])) out << format_double(s.values[run]);
        out << '\n';
      }
  }

  Json manifest;
  manifest["version"] = kVersion;
  manifest["config"] = config_to_json(cfg);
  manifest["threshold"] = cfg.cc_threshold;
  manifest["n_runs"] = cfg.n_runs;
  manifest["selected_rank"] =
      report.selected_rank > 0 ? Json(report.selected_rank) : Json();
  Json warnings = Json::array();
  if (cfg.n_runs < 2) {
    warnings.push_back("confidence interval omitted: n_runs < 2");
    log_warn("cc-scan: confidence interval omitted (n_runs < 2)");
  }
  manifest["warnings"] = warnings;
  detail::write_manifest(cfg, "ccscan_manifest.json", manifest);

  std::cout << "selected_rank="
            << (report.selected_rank > 0 ? std::to_string(report.selected_rank)
                                         : std::string("none"))
            << "\n";
  return manifest;
}

namespace detail {

// Memberships for clustering and thresholding: the user factors scaled by
// the component weights. With unit-norm day/week columns this is the
// coefficient of each user on the component's unit atom, so it does not
// depend on the arbitrary per-component scaling of the raw factors.
inline Matrix load_weighted_memberships(const PipelineConfig& cfg) {
  const Matrix users = load_matrix_csv(artifact(cfg, "factor_users.csv"));
  const Matrix weights = load_matrix_csv(artifact(cfg, "factor_weights.csv"));
  if (weights.rows() != users.cols() || weights.cols() != 1)
    throw std::runtime_error("factor_weights.csv does not match factor_users.csv");
  return users * Vector(weights.col(0)).asDiagonal();
}

}  // namespace detail

/// factor_users.csv -> cluster labels, silhouette table, elbow curve.
inline Json run_cluster(const PipelineConfig& cfg) {
  const Matrix memberships = detail::load_weighted_memberships(cfg);
  const std::vector<std::string> users =
      detail::load_users_csv(detail::artifact(cfg, "users.csv"));
  if (static_cast<Index>(users.size()) != memberships.rows())
    throw std::runtime_error("cluster: users.csv and factor_users.csv disagree");

  const MembershipShares shares = membership_shares(memberships);
  if (!shares.zero_rows.empty())
    log_warn("cluster: " + std::to_string(shares.zero_rows.size()) +
             " inactive users assigned uniform shares");

  ClusteringResult result;
  if (cfg.cluster_method == "kmedoids")
    result = kmedoids(shares.shares, cfg.k, cfg.seed);
  else if (cfg.cluster_method == "kmeans")
    result = kmeans(shares.shares, cfg.k, cfg.seed);
  else
    throw std::invalid_argument("cluster: unknown method '" + cfg.cluster_method +
                                "' (expected kmedoids or kmeans)");

  SilhouetteResult sil;
  if (cfg.k >= 2) {
    sil = silhouette(shares.shares, result.labels);
  } else {
    sil.coefficients.assign(users.size(), 0.0);
    log_warn("cluster: silhouette undefined for k=1, coefficients set to 0");
  }

  std::vector<int> k_values;
  for (int k = cfg.k_min; k <= std::min<int>(cfg.k_max, shares.shares.rows()); ++k)
    k_values.push_back(k);
  const auto elbow = elbow_curve(shares.shares, k_values, cfg.seed,
                                 cfg.cluster_restarts, cfg.threads);

  detail::save_labels_csv(detail::artifact(cfg, "clusters.csv"),
                          "user_id,cluster", users, result.labels);
  {
    auto out = open_output(detail::artifact(cfg, "silhouette.csv"));
    out << "user_id,cluster,silhouette\n";
    for (std::size_t i = 0; i < users.size(); ++i)
      out << csv_escape(users[i]) << ',' << result.labels[i] << ','
          << format_double(sil.coefficients[i]) << '\n';
  }
  {
    auto out = open_output(detail::artifact(cfg, "elbow.csv"));
    out << "k,total_cost\n";
    for (const auto& [k, cost] : elbow)
      out << k << ',' << format_double(cost) << '\n';
  }

  Json manifest;
  manifest["version"] = kVersion;
  manifest["config"] = config_to_json(cfg);
  manifest["method"] = result.method;
  manifest["k"] = cfg.k;
  manifest["seed"] = result.seed;
  manifest["total_cost"] = result.total_cost;
  manifest["mean_silhouette"] = sil.mean;
  manifest["inactive_users"] = shares.zero_rows.size();
  if (!result.medoid_indices.empty()) {
    Json medoids = Json::array();
    for (Index m : result.medoid_indices)
      medoids.push_back(users[static_cast<std::size_t>(m)]);
    manifest["medoid_user_ids"] = medoids;
  }
  detail::write_manifest(cfg, "cluster_manifest.json", manifest);

  std::cout << "method=" << result.method << " k=" << cfg.k << " total_cost="
            << format_double(result.total_cost) << " mean_silhouette="
            << format_double(sil.mean) << "\n";
  return manifest;
}

/// clusters.csv + demographics -> chi-squared reports, representative
/// groups, Jaccard overlaps and the plot-ready share tables. Skipped with a
/// notice when no demographics are available.
inline Json run_stats(const PipelineConfig& cfg) {
  std::string demo_path = cfg.demographics_path;
  if (demo_path.empty()) {
    const std::string generated = detail::artifact(cfg, "demographics.csv");
    if (std::filesystem::exists(generated)) demo_path = generated;
  }
  detail::ensure_output_dir(cfg);
  if (demo_path.empty()) {
    log_info("stats: no demographics input; statistics skipped");
    Json manifest;
    manifest["version"] = kVersion;
    manifest["config"] = config_to_json(cfg);
    manifest["skipped"] = true;
    manifest["reason"] = "no demographics input";
    detail::write_manifest(cfg, "stats_manifest.json", manifest);
    std::cout << "stats=skipped\n";
    return manifest;
  }

  auto demo_in = open_input(demo_path);
  const DemographicParseResult demo = parse_demographics(demo_in);
  for (const auto& e : demo.report.errors) log_warn(demo_path + " " + e);

  const auto [users, labels] =
      detail::load_labels_csv(detail::artifact(cfg, "clusters.csv"), "user_id,cluster");
  const Matrix memberships = detail::load_weighted_memberships(cfg);

  int excluded = 0;

  // Per-attribute goodness of fit against the population composition.
  {
    auto out = open_output(detail::artifact(cfg, "chi_null.csv"));
    out << "attribute,chi2,dof,p_value,cells_dropped,cells_small_expected\n";
    for (Attribute a : kAttributes) {
      const ContingencyTable table = contingency(users, labels, demo.table, a);
      excluded = table.excluded_users;
      const ChiSquaredResult res = chi_squared_test(table);
      out << csv_escape(attribute_name(a)) << ',' << format_double(res.statistic)
          << ',' << res.dof << ',' << format_double(res.p_value) << ','
          << res.cells_dropped << ',' << res.cells_small_expected << '\n';
    }
  }

  // Pairwise cluster tests, Bonferroni-starred.
  {
    auto out = open_output(detail::artifact(cfg, "pairwise.csv"));
    out << "attribute,cluster_x,cluster_y,chi2,significance\n";
    int small_cells = 0;
    for (Attribute a : kAttributes) {
      for (const PairwiseTest& pt : pairwise_tests(users, labels, demo.table, a)) {
        small_cells += pt.test.cells_small_expected;
        out << csv_escape(attribute_name(a)) << ',' << pt.cluster_x << ','
            << pt.cluster_y << ',' << format_double(pt.test.statistic) << ','
            << pt.significance << '\n';
      }
    }
    if (small_cells > 0)
      log_warn("stats: " + std::to_string(small_cells) +
               " pairwise cells have expected count < 5");
  }

  // Per-cluster demographic shares (users with demographics only).
  {
    auto out = open_output(detail::artifact(cfg, "cluster_shares.csv"));
    out << "attribute,category,cluster,share\n";
    for (Attribute a : kAttributes) {
      const ContingencyTable table = contingency(users, labels, demo.table, a);
      for (Index c = 0; c < table.observed.cols(); ++c) {
        const double size = table.observed.col(c).sum();
        for (Index l = 0; l < table.observed.rows(); ++l)
          out << csv_escape(attribute_name(a)) << ','
              << csv_escape(category_label(a, static_cast<int>(l))) << ','
              << table.cluster_ids[static_cast<std::size_t>(c)] << ','
              << format_double(size > 0 ? table.observed(l, c) / size : 0.0)
              << '\n';
      }
    }
  }

  const RepresentativeGroups groups =
      representative_groups(memberships, cfg.representative_fraction);
  {
    auto out = open_output(detail::artifact(cfg, "representatives.csv"));
    out << "component,user_id\n";
    for (std::size_t r = 0; r < groups.members.size(); ++r)
      for (Index i : groups.members[r])
        out << r << ',' << csv_escape(users[static_cast<std::size_t>(i)]) << '\n';
  }
  {
    auto out = open_output(detail::artifact(cfg, "rep_thresholds.csv"));
    out << "component,threshold\n";
    for (std::size_t r = 0; r < groups.thresholds.size(); ++r)
      out << r << ',' << format_double(groups.thresholds[r]) << '\n';
  }
  {
    const Matrix jac = jaccard_overlap(groups);
    auto out = open_output(detail::artifact(cfg, "jaccard.csv"));
    out << "component_x,component_y,jaccard\n";
    for (Index a = 0; a < jac.rows(); ++a)
      for (Index b = 0; b < jac.cols(); ++b)
        out << a << ',' << b << ',' << format_double(jac(a, b)) << '\n';
  }

  // Demographic shares of each component's representative users.
  {
    auto out = open_output(detail::artifact(cfg, "component_shares.csv"));
    out << "attribute,category,component,share\n";
    for (Attribute a : kAttributes) {
      for (std::size_t r = 0; r < groups.members.size(); ++r) {
        std::vector<double> counts(static_cast<std::size_t>(category_count(a)), 0.0);
        double total = 0.0;
        for (Index i : groups.members[r]) {
          const DemographicRecord* rec =
              demo.table.find(users[static_cast<std::size_t>(i)]);
          if (!rec) continue;
          counts[static_cast<std::size_t>(category_of(*rec, a))] += 1.0;
          total += 1.0;
        }
        for (std::size_t cidx = 0; cidx < counts.size(); ++cidx)
          out << csv_escape(attribute_name(a)) << ','
              << csv_escape(category_label(a, static_cast<int>(cidx))) << ','
              << r << ','
              << format_double(total > 0 ? counts[cidx] / total : 0.0) << '\n';
      }
    }
  }

  Json manifest;
  manifest["version"] = kVersion;
  manifest["config"] = config_to_json(cfg);
  manifest["skipped"] = false;
  manifest["demographics"] = demo_path;
  manifest["demographics_parse"] = detail::parse_report_json(demo.report);
  manifest["excluded_users"] = excluded;
  manifest["representative_fraction"] = cfg.representative_fraction;
  Json sizes = Json::array();
  for (const auto& g : groups.members) sizes.push_back(g.size());
  manifest["representative_group_sizes"] = sizes;
  detail::write_manifest(cfg, "stats_manifest.json", manifest);

  std::cout << "stats=done attributes=4 pairs_per_attribute="
            << (std::set<int>(labels.begin(), labels.end()).size() *
                (std::set<int>(labels.begin(), labels.end()).size() - 1) / 2)
            << "\n";
  return manifest;
}

/// Collects the plot-ready tables produced upstream into output_dir/report,
/// with one manifest recording the config, seeds, version and input hashes.
inline Json run_report(const PipelineConfig& cfg) {
  const std::string report_dir =
      (std::filesystem::path(cfg.output_dir) / "report").string();
  std::filesystem::create_directories(report_dir);

  const Matrix days = load_matrix_csv(detail::artifact(cfg, "factor_days.csv"));
  const Matrix weeks = load_matrix_csv(detail::artifact(cfg, "factor_weeks.csv"));
  static constexpr const char* kDayNames[7] = {
      "Mon", "Tue", "Wed", "Thu", "Fri", "Sat", "Sun"};

  const auto report_path = [&](const std::string& name) {
    return (std::filesystem::path(report_dir) / name).string();
  };

  {
    auto out = open_output(report_path("day_activity.csv"));
    out << "day,day_name";
    for (Index r = 0; r < days.cols(); ++r) out << ",component_" << r;
    out << '\n';
    for (Index j = 0; j < days.rows(); ++j) {
      out << j << ',' << kDayNames[(j + cfg.calendar.week_start) % 7];
      for (Index r = 0; r < days.cols(); ++r) out << ',' << format_double(days(j, r));
      out << '\n';
    }
  }
  {
    auto out = open_output(report_path("week_activity.csv"));
    out << "week";
    for (Index r = 0; r < weeks.cols(); ++r) out << ",component_" << r;
    out << '\n';
    for (Index k = 0; k < weeks.rows(); ++k) {
      out << k;
      for (Index r = 0; r < weeks.cols(); ++r) out << ',' << format_double(weeks(k, r));
      out << '\n';
    }
  }

  const std::vector<std::pair<std::string, std::string>> copies = {
      {"ccscan.csv", "cc_curve.csv"},
      {"elbow.csv", "elbow.csv"},
      {"cluster_shares.csv", "cluster_shares.csv"},
      {"component_shares.csv", "component_shares.csv"},
      {"jaccard.csv", "jaccard.csv"},
  };
  for (const auto& [src, dst] : copies)
    write_file(report_path(dst), read_file(detail::artifact(cfg, src)));

  Json manifest;
  manifest["version"] = kVersion;
  manifest["config"] = config_to_json(cfg);
  manifest["seed"] = cfg.seed;
  Json inputs;
  if (!cfg.receipts_path.empty())
    inputs["receipts_hash"] = hash_file_hex(cfg.receipts_path);
  if (!cfg.demographics_path.empty())
    inputs["demographics_hash"] = hash_file_hex(cfg.demographics_path);
  inputs["tensor_hash"] = hash_file_hex(detail::artifact(cfg, "tensor.csv"));
  manifest["inputs"] = inputs;
  Json files = Json::array();
  files.push_back("cc_curve.csv");
  files.push_back("day_activity.csv");
  files.push_back("week_activity.csv");
  files.push_back("cluster_shares.csv");
  files.push_back("component_shares.csv");
  files.push_back("elbow.csv");
  files.push_back("jaccard.csv");
  manifest["files"] = files;
  write_file(report_path("manifest.json"), manifest.dump(2) + "\n");

  std::cout << "report_dir=" << report_dir << " files=" << files.size() << "\n";
  return manifest;
}

}  // namespace cadence
