// codedist - hierarchy distances between clinical code sets and coder
// agreement reports.
//
//   codedist validate --edges terminology.csv
//   codedist distance --edges terminology.csv --left 202852009|58150001 --right 76318008|58150001
//   codedist report run.json
//
// Exit codes: 0 ok, 1 parse error, 2 validation error, 3 I/O error,
// 4 code set empty after normalization, 5 configuration error.

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "codedist/codedist.hpp"

namespace {

using namespace codedist;

enum Exit : int {
  kOk = 0,
  kParse = 1,
  kValidation = 2,
  kIo = 3,
  kEmptyAfterNormalization = 4,
  kConfig = 5,
};

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::MalformedLine:
    case ErrorKind::DuplicateRecord:
      return kParse;
    case ErrorKind::IoFailure:
      return kIo;
    case ErrorKind::ConfigError:
    case ErrorKind::UnknownCoder:
    case ErrorKind::InvalidThresholds:
      return kConfig;
    case ErrorKind::EmptyCodeSet:
      return kEmptyAfterNormalization;
    default:
      return kValidation;
  }
}

struct GlobalOptions {
  std::string edges;
  std::string rf2_concepts;
  std::string rf2_relationships;
  std::string selector = "inferred";
  bool include_inactive = false;
  bool lenient = false;
  std::uint64_t focus_root = kClinicalFinding.value;
  bool strict_descendants = false;
  std::string policy = "term_count";
  std::string thresholds = "1,2,3";
};

Thresholds parse_threshold_list(const std::string& text) {
  std::vector<Rational> bounds;
  for (auto part : detail::split(text, ',')) {
    auto r = parse_rational(detail::trim(part));
    if (!r)
      throw Error(ErrorKind::InvalidThresholds,
                  "invalid threshold '" + std::string(part) + "'");
    bounds.push_back(*r);
  }
  return Thresholds(std::move(bounds));
}

DenominatorPolicy parse_policy_flag(const std::string& text) {
  auto p = parse_policy(text);
  if (!p)
    throw Error(ErrorKind::ConfigError,
                "--policy must be term_count or set_union, got '" + text + "'");
  return *p;
}

IngestConfig ingest_config(const GlobalOptions& o) {
  IngestConfig c;
  const bool rf2 = !o.rf2_concepts.empty() || !o.rf2_relationships.empty();
  if (rf2 == !o.edges.empty())
    throw Error(ErrorKind::ConfigError,
                "give either --edges or both --rf2-concepts and --rf2-relationships");
  if (rf2) {
    if (o.rf2_concepts.empty() || o.rf2_relationships.empty())
      throw Error(ErrorKind::ConfigError,
                  "--rf2-concepts and --rf2-relationships go together");
    auto sel = parse_selector(o.selector);
    if (!sel)
      throw Error(ErrorKind::ConfigError, "--selector must be inferred, stated or any");
    c = IngestConfig::rf2(o.rf2_concepts, o.rf2_relationships, *sel);
    c.include_inactive = o.include_inactive;
  } else {
    c = IngestConfig::edge_list(o.edges);
  }
  c.mode = o.lenient ? ParseMode::Lenient : ParseMode::Strict;
  return c;
}

std::vector<ConceptId> parse_code_list(const std::string& text, const char* flag) {
  std::vector<ConceptId> out;
  for (auto part : detail::split(text, '|')) {
    auto id = parse_concept_id(detail::trim(part));
    if (!id)
      throw MalformedLine(flag, 1, "invalid code '" + std::string(part) + "'");
    out.push_back(*id);
  }
  return out;
}

int cmd_validate(const GlobalOptions& o, const std::string& report_path) {
  const Ingested t = ingest(ingest_config(o));
  const FocusView view =
      focus_subgraph(t.graph, ConceptId{o.focus_root}, !o.strict_descendants);
  std::cout << "concepts: " << t.graph.concept_count()
            << ", edges: " << t.graph.edge_count()
            << ", focus members: " << view.size() << "\n"
            << "acyclic: yes\n";
  for (const auto& w : t.report.warnings) std::cerr << "warning: " << w << "\n";
  if (!report_path.empty())
    write_text_file(report_path, to_json(t.report).dump(2) + "\n");
  return kOk;
}

int cmd_distance(const GlobalOptions& o, const std::string& left,
                 const std::string& right, bool as_json) {
  const auto thresholds = parse_threshold_list(o.thresholds);
  const auto policy = parse_policy_flag(o.policy);
  const auto left_raw = parse_code_list(left, "--left");
  const auto right_raw = parse_code_list(right, "--right");
  const Ingested t = ingest(ingest_config(o));
  const FocusView view =
      focus_subgraph(t.graph, ConceptId{o.focus_root}, !o.strict_descendants);

  const Normalized l = normalize_code_set(left_raw, view);
  const Normalized r = normalize_code_set(right_raw, view);
  if (!l.codes || !r.codes) {
    Json j{{"left_normalization", to_json(l.report)},
           {"right_normalization", to_json(r.report)}};
    std::cerr << "code set empty after normalization\n" << j.dump(2) << "\n";
    return kEmptyAfterNormalization;
  }
  const DistanceResult d = code_set_distance(*l.codes, *r.codes, view, policy);
  if (as_json) {
    Json j = to_json(d, thresholds);
    j["left"] = to_string(*l.codes);
    j["right"] = to_string(*r.codes);
    j["left_normalization"] = to_json(l.report);
    j["right_normalization"] = to_json(r.report);
    j["thresholds"] = to_json(thresholds);
    j["focus_root"] = o.focus_root;
    j["focus_inclusive"] = !o.strict_descendants;
    std::cout << j.dump(2) << "\n";
  } else {
    std::cout << "left: " << to_string(*l.codes) << "\n"
              << "right: " << to_string(*r.codes) << "\n"
              << "numerator: " << d.numerator << "\n"
              << "denominator: " << d.denominator << "\n"
              << "value: " << to_string(d.value) << "\n"
              << "policy: " << to_string(d.policy) << "\n"
              << "band: " << band_label(distance_band(d, thresholds), thresholds) << "\n";
  }
  return kOk;
}

int cmd_report(const CLI::App& app, const GlobalOptions& o, const std::string& config_path,
               const std::string& output, const std::string& markdown) {
  RunConfig config = load_run_config(config_path);
  // Explicit flags override the document.
  if (app.count("--edges") || app.count("--rf2-concepts") || app.count("--rf2-relationships"))
    config.ingest = ingest_config(o);
  if (app.count("--lenient"))
    config.ingest.mode = o.lenient ? ParseMode::Lenient : ParseMode::Strict;
  if (app.count("--focus-root")) config.focus_root = ConceptId{o.focus_root};
  if (app.count("--strict-descendants")) config.focus_inclusive = !o.strict_descendants;
  if (app.count("--policy")) config.policy = parse_policy_flag(o.policy);
  if (app.count("--thresholds")) config.thresholds = parse_threshold_list(o.thresholds);
  if (!output.empty()) config.output_path = output;
  if (!markdown.empty()) config.markdown_path = markdown;

  const Report rep = run_report(config);
  write_report(config, rep);
  std::cout << config.output_path << "\n";
  if (config.markdown_path) std::cout << *config.markdown_path << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hierarchy distances between clinical code sets and coder agreement reports"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions o;
  app.add_option("--edges", o.edges, "Edge-list CSV (child_id,parent_id)");
  app.add_option("--rf2-concepts", o.rf2_concepts, "RF2 concept snapshot file");
  app.add_option("--rf2-relationships", o.rf2_relationships, "RF2 relationship snapshot file");
  app.add_option("--selector", o.selector, "RF2 relationships: inferred, stated or any")
      ->capture_default_str();
  app.add_flag("--include-inactive", o.include_inactive, "Keep inactive RF2 concepts");
  app.add_flag("--lenient", o.lenient, "Skip malformed terminology lines instead of failing");
  app.add_option("--focus-root", o.focus_root, "Focus concept")->capture_default_str();
  app.add_flag("--strict-descendants", o.strict_descendants,
               "Exclude the focus root itself from the focus");
  app.add_option("--policy", o.policy, "Denominator: term_count or set_union")
      ->capture_default_str();
  app.add_option("--thresholds", o.thresholds, "Band upper bounds, comma-separated")
      ->capture_default_str();

  std::string ingest_report;
  auto* validate = app.add_subcommand("validate", "Check a terminology and print its size");
  validate->add_option("--ingest-report", ingest_report, "Write the ingest report JSON here");

  std::string left, right;
  bool as_json = false;
  auto* distance = app.add_subcommand("distance", "Distance between two code sets");
  distance->add_option("--left", left, "Pipe-separated codes")->required();
  distance->add_option("--right", right, "Pipe-separated codes")->required();
  distance->add_flag("--json", as_json, "Print JSON instead of key: value lines");

  std::string config_path, output, markdown;
  auto* report = app.add_subcommand("report", "Run an evaluation described by a config file");
  report->add_option("config", config_path, "Run configuration (JSON)")->required();
  report->add_option("--output", output, "Override the JSON report path");
  report->add_option("--markdown", markdown, "Override the markdown report path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfig;
  }

  try {
    if (*validate) return cmd_validate(o, ingest_report);
    if (*distance) return cmd_distance(o, left, right, as_json);
    if (*report) return cmd_report(app, o, config_path, output, markdown);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kValidation;
  }
  return kOk;
}
