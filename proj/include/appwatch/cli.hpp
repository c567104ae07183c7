/* Copyright 2026 The AppWatch Authors.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#pragma once

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "appwatch/http_provider.hpp"
#include "appwatch/pipeline.hpp"
#include "appwatch/service.hpp"

namespace appwatch {

namespace cli_detail {

inline std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

inline std::vector<double> parse_doubles(const std::string& text, const std::string& what) {
  std::vector<double> out;
  for (const auto& item : split_list(text)) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      fail(ErrorCode::kUsage, what + ": '" + item + "' is not a number");
    }
  }
  return out;
}

inline std::vector<std::size_t> parse_sizes(const std::string& text) {
  std::vector<std::size_t> out;
  for (const auto& item : split_list(text)) {
    try {
      std::size_t used = 0;
      const long long v = std::stoll(item, &used);
      if (used != item.size() || v < 0) throw std::invalid_argument(item);
      out.push_back(static_cast<std::size_t>(v));
    } catch (const std::exception&) {
      fail(ErrorCode::kUsage, "--sizes: '" + item + "' is not a non-negative integer");
    }
  }
  return out;
}

inline std::string one_line(std::string s) {
  for (char& c : s) {
    if (c == '\n' || c == '\r') c = ' ';
  }
  return s;
}

/// Provider for one facility. `mock:DIR` reads DIR/<facility_id> when that
/// directory exists and DIR itself otherwise.
inline std::unique_ptr<ImageryProvider> provider_for(const std::string& spec,
                                                     const std::string& facility_id) {
  if (spec.rfind("mock:", 0) == 0) {
    const std::filesystem::path dir = spec.substr(5);
    if (std::filesystem::is_directory(dir / facility_id)) {
      return std::make_unique<FilesystemProvider>(dir / facility_id);
    }
    return std::make_unique<FilesystemProvider>(dir);
  }
  if (spec.rfind("http:", 0) == 0 || spec.rfind("https:", 0) == 0) {
    const std::string url = spec.rfind("http:", 0) == 0 && spec.rfind("http://", 0) != 0
                                ? spec.substr(5)
                                : spec;
    const char* token = std::getenv("APPWATCH_PROVIDER_TOKEN");
    return std::make_unique<HttpProvider>(url, token ? token : "");
  }
  fail(ErrorCode::kUsage, "--provider must be mock:DIR or http:URL");
}

inline std::pair<std::string, int> parse_addr(const std::string& addr) {
  const auto colon = addr.rfind(':');
  if (colon == std::string::npos) fail(ErrorCode::kUsage, "--addr must be HOST:PORT");
  try {
    const int port = std::stoi(addr.substr(colon + 1));
    if (port < 0 || port > 65535) throw std::out_of_range("port");
    return {addr.substr(0, colon), port};
  } catch (const std::exception&) {
    fail(ErrorCode::kUsage, "--addr must be HOST:PORT");
  }
}

}  // namespace cli_detail

/// Runs the `appwatch` command line. Returns the process exit status;
/// failures print one `error: <code>: <message>` line on `err`.
inline int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"appwatch: satellite monitoring of winter manure application"};
  app.require_subcommand(1);
  std::string store_dir;
  app.add_option("--store", store_dir, "store directory")->envname("APPWATCH_STORE_DIR");

  std::string facilities_csv, provider, config_path, start_s, end_s;
  int season = 0;
  double aoi_side = 1000.0;
  auto* ingest = app.add_subcommand("ingest", "pull and filter a season's imagery catalog");
  ingest->add_option("--facilities", facilities_csv, "facility CSV")->required();
  ingest->add_option("--season", season, "season year (window starts Nov 1)")->required();
  ingest->add_option("--provider", provider, "mock:DIR or http:URL")->required();
  ingest->add_option("--config", config_path, "quality filter config (INI, [filter] section)");
  ingest->add_option("--start", start_s, "override window start (YYYY-MM-DD)");
  ingest->add_option("--end", end_s, "override window end, exclusive (YYYY-MM-DD)");
  ingest->add_option("--aoi-side", aoi_side, "AOI side length in metres");

  std::string det_file, label_file, verdict_file;
  auto* import_det = app.add_subcommand("import-detections", "store model detections");
  import_det->add_option("file", det_file)->required();
  auto* import_lab = app.add_subcommand("import-labels", "store ground-truth labels");
  import_lab->add_option("file", label_file)->required();

  std::string kind_s = "predicted";
  double threshold = 0.0;
  auto* events = app.add_subcommand("events", "cluster boxes into application events");
  events->add_option("--kind", kind_s)->check(CLI::IsMember({"predicted", "truth", "ground_truth"}));
  events->add_option("--threshold", threshold, "drop detections below this confidence");

  std::uint64_t split_seed = 0;
  bool all_parts = false;
  EvaluateOptions eval_opt;
  auto* evaluate = app.add_subcommand("evaluate", "score detections against labels");
  auto* seed_opt = evaluate->add_option("--split-seed", split_seed, "location split seed");
  evaluate->add_flag("--all", all_parts, "score every labeled partition instead of the test split");
  evaluate->add_option("--decision-threshold", eval_opt.decision_threshold);
  evaluate->add_option("--iou", eval_opt.iou_threshold);

  std::string edges_s, sizes_s;
  bool force = false;
  std::uint64_t sample_seed = 0;
  auto* stratify = app.add_subcommand("stratify", "bin predicted events by confidence");
  stratify->add_option("--edges", edges_s, "bin edges, e.g. 0.25,0.5,0.75")->required();
  stratify->add_flag("--force", force, "discard existing verdicts");
  auto* sample = app.add_subcommand("sample", "draw the review sample");
  sample->add_option("--sizes", sizes_s, "units per bin, bin 0 first")->required();
  sample->add_option("--seed", sample_seed)->required();
  sample->add_flag("--force", force, "discard existing verdicts");

  auto* verdicts = app.add_subcommand("verdicts", "reviewer verdicts");
  verdicts->require_subcommand(1);
  auto* verdicts_import = verdicts->add_subcommand("import", "upsert verdicts from CSV");
  verdicts_import->add_option("file", verdict_file)->required();

  double z = 1.0;
  std::string estimate_out;
  auto* estimate = app.add_subcommand("estimate", "prevalence estimate from verdicts");
  estimate->add_option("--z", z, "interval half-width in standard errors");
  estimate->add_option("--out", estimate_out, "also write the estimate to this file");

  std::string report_out;
  std::string report_kind = "predicted";
  double yoy_ratio = 1.5;
  auto* report = app.add_subcommand("report", "season analytics bundle");
  report->add_option("--out", report_out, "directory for JSON/CSV outputs");
  report->add_option("--kind", report_kind)->check(CLI::IsMember({"predicted", "truth", "ground_truth"}));
  report->add_option("--yoy-ratio", yoy_ratio);

  std::string addr = "127.0.0.1:8080";
  auto* serve = app.add_subcommand("serve", "HTTP service for reviewers");
  serve->add_option("--addr", addr, "HOST:PORT");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: usage: " << cli_detail::one_line(e.what()) << '\n';
    return 2;
  }

  try {
    if (store_dir.empty()) fail(ErrorCode::kUsage, "--store or APPWATCH_STORE_DIR is required");
    Pipeline pipe(store_dir);

    if (*ingest) {
      std::ifstream csv(facilities_csv);
      if (!csv) fail(ErrorCode::kNotFound, "cannot open '" + facilities_csv + "'");
      const auto facilities = parse_facilities_csv(csv, facilities_csv);
      SeasonWindow window = SeasonWindow::winter(season);
      if (!start_s.empty() || !end_s.empty()) {
        window = SeasonWindow::make(season, start_s.empty() ? window.start_date : parse_date(start_s),
                                    end_s.empty() ? window.end_date : parse_date(end_s));
      }
      const FilterConfig cfg = config_path.empty() ? FilterConfig{} : load_filter_config(config_path);
      std::size_t total = 0, retained = 0;
      for (const auto& f : facilities) {
        auto p = cli_detail::provider_for(provider, f.facility_id);
        const IngestSummary s = pipe.ingest({f}, window, *p, cfg, aoi_side);
        for (const auto& w : s.warnings) err << "warning: " << cli_detail::one_line(w) << '\n';
        for (const auto& fs : s.facilities) {
          out << fs.facility_id << ": " << fs.retained << "/" << fs.total << " retained\n";
        }
        total += s.total();
        retained += s.retained();
      }
      out << "total: " << retained << "/" << total << " images retained\n";
    } else if (*import_det) {
      const ImportSummary s = pipe.import_detections(det_file);
      out << s.records << " detections imported into " << s.per_partition.size() << " partitions\n";
    } else if (*import_lab) {
      const ImportSummary s = pipe.import_labels(label_file);
      out << s.records << " labels imported into " << s.per_partition.size() << " partitions\n";
    } else if (*events) {
      const EventsSummary s = pipe.build_events(parse_event_kind(kind_s), threshold);
      for (const auto& [fid, n] : s.per_facility) out << fid << ": " << n << '\n';
      out << s.total << " events\n";
    } else if (*evaluate) {
      if (!all_parts && !*seed_opt) fail(ErrorCode::kUsage, "evaluate needs --split-seed or --all");
      eval_opt.split_seed = split_seed;
      eval_opt.all_partitions = all_parts;
      out << pipe.evaluate(eval_opt).dump(2) << '\n';
    } else if (*stratify) {
      const Stratification s =
          pipe.stratify(cli_detail::parse_doubles(edges_s, "--edges"), force);
      out << "bin,lower,upper,size\n";
      for (std::size_t i = 0; i < s.bin_count(); ++i) {
        out << i << ',' << (i == 0 ? 0.0 : s.edges[i - 1]) << ',' << s.edges[i == 0 ? 0 : i]
            << ',' << s.bin_size(i) << '\n';
      }
    } else if (*sample) {
      const SampleDraw d = pipe.sample(cli_detail::parse_sizes(sizes_s), sample_seed, force);
      for (const auto& w : d.warnings) err << "warning: " << cli_detail::one_line(w) << '\n';
      out << pipe.manifest_csv();
    } else if (*verdicts_import) {
      std::ifstream in(verdict_file);
      if (!in) fail(ErrorCode::kNotFound, "cannot open '" + verdict_file + "'");
      const auto list = parse_verdicts_csv(in, verdict_file);
      const std::size_t added = pipe.submit_verdicts(list);
      out << list.size() << " verdicts imported (" << added << " new)\n";
    } else if (*estimate) {
      const std::string doc = pipe.persist_estimate(z);
      if (!estimate_out.empty()) {
        std::ofstream f(estimate_out, std::ios::binary | std::ios::trunc);
        if (!f) fail(ErrorCode::kIntegrity, "cannot write '" + estimate_out + "'");
        f << doc;
      }
      out << doc;
    } else if (*report) {
      const Json bundle = pipe.report(parse_event_kind(report_kind), report_out, yoy_ratio);
      out << bundle.dump(2) << '\n';
    } else if (*serve) {
      const auto [host, port] = cli_detail::parse_addr(addr);
      Service service(store_dir, Service::token_from_env());
      err << "listening on " << host << ':' << port << std::endl;
      if (!service.listen(host, port)) fail(ErrorCode::kProviderIo, "cannot listen on " + addr);
    }
    return 0;
  } catch (const Error& e) {
    err << "error: " << to_string(e.code()) << ": " << cli_detail::one_line(e.what()) << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "error: internal: " << cli_detail::one_line(e.what()) << '\n';
    return 1;
  }
}

}  // namespace appwatch
