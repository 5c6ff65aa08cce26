#include "puprior/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <sstream>
#include <thread>

#include "puprior/errors.hpp"
#include "puprior/pca.hpp"
#include "puprior/rng.hpp"

namespace puprior {

namespace {

using nlohmann::ordered_json;

ordered_json schema_to_json(const CsvSchema& schema) {
  return ordered_json{{"has_header", schema.has_header},
                      {"feature_columns", schema.feature_columns},
                      {"label_column", schema.label_column},
                      {"positive_label", schema.positive_label},
                      {"binarize_at_mean", schema.binarize_at_mean}};
}

CsvSchema schema_from_json(const nlohmann::json& doc) {
  CsvSchema schema;
  schema.has_header = doc.value("has_header", false);
  if (doc.contains("feature_columns")) {
    schema.feature_columns = doc.at("feature_columns").get<std::vector<int>>();
  }
  schema.label_column = doc.value("label_column", -1);
  schema.positive_label = doc.value("positive_label", std::string{});
  schema.binarize_at_mean = doc.value("binarize_at_mean", false);
  return schema;
}

ordered_json estimate_to_json(const PriorEstimate& est) {
  ordered_json doc;
  doc["method"] = method_name(est.method);
  doc["alpha_plus"] = est.alpha_plus;
  doc["beta_plus"] = est.beta_plus;
  doc["alpha_star"] = est.alpha_star;
  doc["beta_star"] = est.beta_star;
  if (est.curve_alpha) {
    doc["elbow_alpha"] = est.curve_alpha->elbow_r;
    doc["elbow_alpha_degenerate"] = est.curve_alpha->elbow_degenerate;
  }
  if (est.curve_beta) {
    doc["elbow_beta"] = est.curve_beta->elbow_r;
    doc["elbow_beta_degenerate"] = est.curve_beta->elbow_degenerate;
  }
  return doc;
}

struct PreparedData {
  PUDataset data;        // what the estimators see
  double alpha_true = 0.0;
  double beta_true = 0.0;
  double oob_auc = std::numeric_limits<double>::quiet_NaN();
};

PreparedData prepare_repeat(const ExperimentConfig& config,
                            const CsvData* shared_csv, std::uint64_t seed) {
  PUDataset raw;
  if (const auto* synth = std::get_if<SyntheticSource>(&config.source)) {
    SyntheticSpec spec;
    spec.family = synth->family;
    spec.delta_mu = synth->delta_mu;
    spec.alpha = synth->alpha;
    spec.beta = synth->beta;
    spec.n_unlabeled = synth->n_unlabeled;
    spec.n_labeled = synth->n_labeled;
    spec.seed = seed;
    raw = gen_synthetic(spec);
  } else {
    const auto& csv = std::get<CsvSource>(config.source);
    raw = pu_split(shared_csv->features, shared_csv->labels, csv.n_labeled,
                   csv.beta, seed, csv.unlabeled_cap);
  }

  PreparedData prepared;
  prepared.alpha_true = raw.truth->alpha_true;
  prepared.beta_true = raw.truth->beta_true;

  if (config.transform) {
    const ScoreModel model =
        fit_nontraditional(raw, config.mlp, derive_seed(seed, 0xA11));
    const TransformedPU scores = oob_scores(model, raw);
    prepared.oob_auc =
        auc_labeled_vs_unlabeled(scores.scores_labeled, scores.scores_unlabeled);
    PUDataset transformed;
    transformed.unlabeled = scores.scores_unlabeled;
    transformed.labeled = scores.scores_labeled;
    transformed.truth = raw.truth;
    prepared.data = std::move(transformed);
  } else if (config.pca_components > 0) {
    Eigen::MatrixXd stacked(raw.unlabeled.rows() + raw.labeled.rows(),
                            raw.unlabeled.cols());
    stacked.topRows(raw.unlabeled.rows()) = raw.unlabeled;
    stacked.bottomRows(raw.labeled.rows()) = raw.labeled;
    const PcaResult pca = zscore_pca(stacked, config.pca_components);
    PUDataset reduced;
    reduced.unlabeled = pca.projected.topRows(raw.unlabeled.rows());
    reduced.labeled = pca.projected.bottomRows(raw.labeled.rows());
    reduced.truth = raw.truth;
    prepared.data = std::move(reduced);
  } else {
    prepared.data = std::move(raw);
  }
  return prepared;
}

void run_methods(const ExperimentConfig& config, const PreparedData& prepared,
                 std::uint64_t seed, RepeatRecord& record) {
  const PUDataset& data = prepared.data;

  if (config.run_msgmm) {
    MethodResult result;
    try {
      MsGmmConfig cfg = config.msgmm;
      cfg.seed = derive_seed(seed, 0xE3);
      result.estimate = fit_msgmm(data, cfg).estimate;
      result.ok = true;
    } catch (const std::exception& err) {
      result.error = err.what();
    }
    record.methods["msgmm"] = std::move(result);
  }

  const bool univariate = data.dim() == 1;
  auto u_col = [&data] { return Eigen::VectorXd(data.unlabeled.col(0)); };
  auto l_col = [&data] { return Eigen::VectorXd(data.labeled.col(0)); };

  if (config.run_alphamax_n) {
    MethodResult result;
    try {
      const AlphaMaxConfig& cfg = config.amax;
      result.estimate =
          univariate
              ? alphamax_n(u_col(), l_col(), cfg, &result.warnings)
              : alphamax_n(data.unlabeled, data.labeled, cfg, &result.warnings);
      result.ok = true;
    } catch (const std::exception& err) {
      result.error = err.what();
    }
    record.methods["alphamax-n"] = std::move(result);
  }

  if (config.run_alphamax) {
    MethodResult result;
    try {
      const AlphaMaxConfig& cfg = config.amax;
      result.estimate = univariate
                            ? alphamax_clean(u_col(), l_col(), cfg)
                            : alphamax_clean(data.unlabeled, data.labeled, cfg);
      result.ok = true;
    } catch (const std::exception& err) {
      result.error = err.what();
    }
    record.methods["alphamax"] = std::move(result);
  }
}

}  // namespace

void ExperimentConfig::validate() const {
  if (repeats < 1) throw InvalidInputError("repeats must be at least 1");
  if (transform && pca_components > 0) {
    throw InvalidInputError(
        "transform and pca are mutually exclusive pipelines");
  }
  if (pca_components < 0) throw InvalidInputError("pca_components must be >= 0");
  if (const auto* synth = std::get_if<SyntheticSource>(&source)) {
    SyntheticSpec spec;
    spec.family = synth->family;
    spec.delta_mu = synth->delta_mu;
    spec.alpha = synth->alpha;
    spec.beta = synth->beta;
    spec.n_unlabeled = synth->n_unlabeled;
    spec.n_labeled = synth->n_labeled;
    spec.validate();
  } else {
    const auto& csv = std::get<CsvSource>(source);
    if (csv.path.empty()) throw InvalidInputError("csv source needs a path");
    if (csv.n_labeled < 1) throw InvalidInputError("n_labeled must be >= 1");
    if (!(csv.beta > 0.0 && csv.beta <= 1.0)) {
      throw InvalidInputError("beta must lie in (0, 1]");
    }
  }
  if (!run_msgmm && !run_alphamax_n && !run_alphamax) {
    throw InvalidInputError("no estimator selected");
  }
}

nlohmann::ordered_json ExperimentConfig::to_json() const {
  ordered_json doc;
  if (const auto* synth = std::get_if<SyntheticSource>(&source)) {
    doc["data"] = ordered_json{{"type", "synthetic"},
                               {"family", family_name(synth->family)},
                               {"delta_mu", synth->delta_mu},
                               {"alpha", synth->alpha},
                               {"beta", synth->beta},
                               {"n_unlabeled", synth->n_unlabeled},
                               {"n_labeled", synth->n_labeled}};
  } else {
    const auto& csv = std::get<CsvSource>(source);
    doc["data"] = ordered_json{{"type", "csv"},
                               {"path", csv.path},
                               {"schema", schema_to_json(csv.schema)},
                               {"n_labeled", csv.n_labeled},
                               {"beta", csv.beta},
                               {"unlabeled_cap", csv.unlabeled_cap}};
  }
  std::vector<std::string> estimators;
  if (run_msgmm) estimators.push_back("msgmm");
  if (run_alphamax_n) estimators.push_back("alphamax-n");
  if (run_alphamax) estimators.push_back("alphamax");
  doc["estimators"] = estimators;
  doc["transform"] = transform;
  doc["pca_components"] = pca_components;
  doc["repeats"] = repeats;
  doc["base_seed"] = base_seed;
  doc["threads"] = threads;
  doc["mlp"] = ordered_json{{"members", mlp.members},
                            {"hidden", mlp.hidden},
                            {"epochs", mlp.epochs},
                            {"batch_size", mlp.batch_size},
                            {"learn_rate", mlp.learn_rate},
                            {"lr_decay", mlp.lr_decay},
                            {"bootstrap_fraction", mlp.bootstrap_fraction},
                            {"max_retries", mlp.max_retries}};
  doc["msgmm"] = ordered_json{{"restarts", msgmm.restarts},
                              {"max_iter", msgmm.max_iter},
                              {"tol", msgmm.tol}};
  doc["alphamax"] = ordered_json{{"r_points", amax.r_points},
                                 {"r_min", amax.r_min},
                                 {"r_max", amax.r_max},
                                 {"max_iter", amax.max_iter},
                                 {"tol", amax.tol}};
  return doc;
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& doc) {
  ExperimentConfig config;
  const auto& data = doc.at("data");
  const std::string type = data.at("type").get<std::string>();
  if (type == "synthetic") {
    SyntheticSource synth;
    synth.family = family_from_name(data.at("family").get<std::string>());
    synth.delta_mu = data.at("delta_mu").get<double>();
    synth.alpha = data.at("alpha").get<double>();
    synth.beta = data.at("beta").get<double>();
    synth.n_unlabeled = data.value("n_unlabeled", std::int64_t{10000});
    synth.n_labeled = data.value("n_labeled", std::int64_t{1000});
    config.source = synth;
  } else if (type == "csv") {
    CsvSource csv;
    csv.path = data.at("path").get<std::string>();
    if (data.contains("schema")) csv.schema = schema_from_json(data.at("schema"));
    csv.n_labeled = data.value("n_labeled", std::int64_t{1000});
    csv.beta = data.value("beta", 1.0);
    csv.unlabeled_cap = data.value("unlabeled_cap", std::int64_t{10000});
    config.source = csv;
  } else {
    throw InvalidInputError("unknown data source type '" + type + "'");
  }

  if (doc.contains("estimators")) {
    config.run_msgmm = config.run_alphamax_n = config.run_alphamax = false;
    for (const auto& name : doc.at("estimators")) {
      const std::string estimator = name.get<std::string>();
      if (estimator == "msgmm") {
        config.run_msgmm = true;
      } else if (estimator == "alphamax-n") {
        config.run_alphamax_n = true;
      } else if (estimator == "alphamax") {
        config.run_alphamax = true;
      } else if (estimator == "all") {
        config.run_msgmm = config.run_alphamax_n = config.run_alphamax = true;
      } else {
        throw InvalidInputError("unknown estimator '" + estimator + "'");
      }
    }
  }
  config.transform = doc.value("transform", false);
  config.pca_components = doc.value("pca_components", 0);
  config.repeats = doc.value("repeats", 50);
  config.base_seed = doc.value("base_seed", std::uint64_t{1});
  config.threads = doc.value("threads", 0);
  if (doc.contains("mlp")) {
    const auto& m = doc.at("mlp");
    config.mlp.members = m.value("members", config.mlp.members);
    config.mlp.hidden = m.value("hidden", config.mlp.hidden);
    config.mlp.epochs = m.value("epochs", config.mlp.epochs);
    config.mlp.batch_size = m.value("batch_size", config.mlp.batch_size);
    config.mlp.learn_rate = m.value("learn_rate", config.mlp.learn_rate);
    config.mlp.lr_decay = m.value("lr_decay", config.mlp.lr_decay);
    config.mlp.bootstrap_fraction =
        m.value("bootstrap_fraction", config.mlp.bootstrap_fraction);
    config.mlp.max_retries = m.value("max_retries", config.mlp.max_retries);
  }
  if (doc.contains("msgmm")) {
    const auto& m = doc.at("msgmm");
    config.msgmm.restarts = m.value("restarts", config.msgmm.restarts);
    config.msgmm.max_iter = m.value("max_iter", config.msgmm.max_iter);
    config.msgmm.tol = m.value("tol", config.msgmm.tol);
  }
  if (doc.contains("alphamax")) {
    const auto& a = doc.at("alphamax");
    config.amax.r_points = a.value("r_points", config.amax.r_points);
    config.amax.r_min = a.value("r_min", config.amax.r_min);
    config.amax.r_max = a.value("r_max", config.amax.r_max);
    config.amax.max_iter = a.value("max_iter", config.amax.max_iter);
    config.amax.tol = a.value("tol", config.amax.tol);
  }
  config.validate();
  return config;
}

nlohmann::ordered_json RunReport::to_json(bool include_timing) const {
  ordered_json doc;
  doc["format"] = "puprior-report/1";
  doc["config"] = config_echo;
  doc["family"] = family_label;
  doc["alpha"] = alpha_label;
  doc["beta"] = beta_label;

  ordered_json aggregates_doc = ordered_json::object();
  for (const auto& [name, agg] : aggregates) {
    aggregates_doc[name] = ordered_json{{"mae", agg.mae},
                                        {"se", agg.se},
                                        {"n_success", agg.n_success},
                                        {"n_failed", agg.n_failed}};
  }
  doc["aggregates"] = std::move(aggregates_doc);

  ordered_json repeats_doc = ordered_json::array();
  for (const auto& record : records) {
    ordered_json entry;
    entry["seed"] = record.seed;
    entry["alpha_true"] = record.alpha_true;
    entry["beta_true"] = record.beta_true;
    entry["data_ok"] = record.data_ok;
    if (!record.data_ok) entry["data_error"] = record.data_error;
    if (std::isfinite(record.oob_auc)) entry["oob_auc"] = record.oob_auc;
    if (include_timing) entry["wall_ms"] = record.wall_ms;
    ordered_json methods_doc = ordered_json::object();
    for (const auto& [name, result] : record.methods) {
      ordered_json method_doc;
      method_doc["ok"] = result.ok;
      if (result.ok) {
        method_doc["estimate"] = estimate_to_json(result.estimate);
      } else {
        method_doc["error"] = result.error;
      }
      if (!result.warnings.empty()) method_doc["warnings"] = result.warnings;
      methods_doc[name] = std::move(method_doc);
    }
    entry["methods"] = std::move(methods_doc);
    repeats_doc.push_back(std::move(entry));
  }
  doc["repeats"] = std::move(repeats_doc);
  return doc;
}

std::string RunReport::to_csv() const {
  std::ostringstream out;
  out.precision(12);
  out << "family,alpha,beta,method,mae,se,n_success,n_failed\n";
  for (const auto& [name, agg] : aggregates) {
    out << family_label << ',' << alpha_label << ',' << beta_label << ','
        << name << ',' << agg.mae << ',' << agg.se << ',' << agg.n_success
        << ',' << agg.n_failed << '\n';
  }
  return out.str();
}

RunReport run_experiment(const ExperimentConfig& config) {
  config.validate();

  RunReport report;
  report.config_echo = config.to_json();

  CsvData shared_csv;
  const CsvData* shared_ptr = nullptr;
  if (const auto* synth = std::get_if<SyntheticSource>(&config.source)) {
    report.family_label = family_name(synth->family);
    report.alpha_label = synth->alpha;
    report.beta_label = synth->beta;
  } else {
    const auto& csv = std::get<CsvSource>(config.source);
    shared_csv = load_csv(csv.path, csv.schema);
    shared_ptr = &shared_csv;
    report.family_label = std::filesystem::path(csv.path).stem().string();
    report.beta_label = csv.beta;
    const double positives = static_cast<double>(
        std::count(shared_csv.labels.begin(), shared_csv.labels.end(), 1));
    const double n = static_cast<double>(shared_csv.labels.size());
    const double labeled_pos =
        std::round(csv.beta * static_cast<double>(csv.n_labeled));
    report.alpha_label =
        (positives - labeled_pos) / (n - static_cast<double>(csv.n_labeled));
  }

  report.records.resize(static_cast<std::size_t>(config.repeats));

  const int want_threads =
      config.threads > 0
          ? config.threads
          : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  const int n_threads = std::min<int>(want_threads, config.repeats);

  // When repeats run in parallel, keep each repeat single-threaded inside.
  ExperimentConfig local = config;
  if (n_threads > 1) local.mlp.threads = 1;

  std::atomic<int> next_repeat{0};
  auto worker = [&] {
    for (;;) {
      const int i = next_repeat.fetch_add(1);
      if (i >= config.repeats) return;
      RepeatRecord& record = report.records[static_cast<std::size_t>(i)];
      record.seed = config.base_seed + static_cast<std::uint64_t>(i);
      const auto start = std::chrono::steady_clock::now();
      try {
        const PreparedData prepared =
            prepare_repeat(local, shared_ptr, record.seed);
        record.alpha_true = prepared.alpha_true;
        record.beta_true = prepared.beta_true;
        record.oob_auc = prepared.oob_auc;
        run_methods(local, prepared, record.seed, record);
      } catch (const std::exception& err) {
        record.data_ok = false;
        record.data_error = err.what();
      }
      record.wall_ms = std::chrono::duration<double, std::milli>(
                           std::chrono::steady_clock::now() - start)
                           .count();
    }
  };

  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  // Aggregates over successful repeats only; failures are counted.
  std::vector<std::string> selected;
  if (config.run_msgmm) selected.push_back("msgmm");
  if (config.run_alphamax_n) selected.push_back("alphamax-n");
  if (config.run_alphamax) selected.push_back("alphamax");
  std::map<std::string, std::vector<double>> abs_errors;
  std::map<std::string, int> failures;
  for (const auto& record : report.records) {
    if (!record.data_ok) {
      for (const auto& name : selected) ++failures[name];
      continue;
    }
    for (const auto& [name, result] : record.methods) {
      if (result.ok) {
        abs_errors[name].push_back(
            std::abs(result.estimate.alpha_star - record.alpha_true));
      } else {
        ++failures[name];
      }
    }
  }
  for (const auto& [name, errors] : abs_errors) {
    MethodAggregate agg;
    agg.n_success = static_cast<int>(errors.size());
    agg.n_failed = failures.count(name) ? failures.at(name) : 0;
    if (!errors.empty()) {
      double mean = 0.0;
      for (double e : errors) mean += e;
      mean /= static_cast<double>(errors.size());
      agg.mae = mean;
      double var = 0.0;
      for (double e : errors) var += (e - mean) * (e - mean);
      if (errors.size() > 1) {
        var /= static_cast<double>(errors.size() - 1);
        agg.se = std::sqrt(var / static_cast<double>(errors.size()));
      } else {
        agg.se = 0.0;
      }
    }
    report.aggregates[name] = agg;
  }
  for (const auto& [name, count] : failures) {
    if (!report.aggregates.count(name)) {
      MethodAggregate agg;
      agg.n_failed = count;
      report.aggregates[name] = agg;
    }
  }
  return report;
}

}  // namespace puprior
