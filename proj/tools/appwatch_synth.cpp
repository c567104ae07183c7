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

// Synthetic fixture generator: a planted-event season in the CLI's input
// formats, and verdict CSVs answering a sample manifest.

#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "appwatch/synthetic.hpp"

namespace {

// Every event unit is answered true with one application image; every
// bin-0 image is answered false.
std::string answer_manifest(std::istream& in, const std::string& reviewer) {
  std::string line;
  std::getline(in, line);
  if (line.rfind("bin,unit_id", 0) != 0) {
    appwatch::fail(appwatch::ErrorCode::kParse, "not a sample manifest");
  }
  std::ostringstream out;
  out << "unit_id,reviewer,is_true_event,images_with_application\n";
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream row(line);
    std::string bin, unit;
    std::getline(row, bin, ',');
    std::getline(row, unit, ',');
    const bool event = bin != "0";
    out << unit << ',' << reviewer << ',' << (event ? "true" : "false") << ',' << (event ? 1 : 0)
        << '\n';
  }
  return out.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"appwatch_synth: synthetic fixtures"};
  app.require_subcommand(1);

  appwatch::SyntheticOptions opt;
  std::string out_dir;
  auto* season = app.add_subcommand("season", "write facilities, scenes, detections and labels");
  season->add_option("--out", out_dir)->required();
  season->add_option("--facilities", opt.facilities);
  season->add_option("--events", opt.events);
  season->add_option("--year", opt.season_year);
  season->add_option("--dropout", opt.dropout);
  season->add_option("--seed", opt.seed);

  std::string manifest, verdict_out, reviewer = "synth";
  auto* verdicts = app.add_subcommand("verdicts", "answer a sample manifest");
  verdicts->add_option("--manifest", manifest)->required();
  verdicts->add_option("--out", verdict_out)->required();
  verdicts->add_option("--reviewer", reviewer);

  CLI11_PARSE(app, argc, argv);
  try {
    if (*season) {
      const auto s = appwatch::make_synthetic_season(opt);
      appwatch::write_synthetic_season(s, out_dir);
      std::cout << s.facilities.size() << " facilities, " << s.scenes.size() << " scenes, "
                << s.planted.size() << " planted events (" << s.detected_count()
                << " detectable)\n";
    } else {
      std::ifstream in(manifest);
      if (!in) appwatch::fail(appwatch::ErrorCode::kNotFound, "cannot open '" + manifest + "'");
      std::ofstream out(verdict_out, std::ios::trunc);
      out << answer_manifest(in, reviewer);
    }
  } catch (const appwatch::Error& e) {
    std::cerr << "error: " << appwatch::to_string(e.code()) << ": " << e.what() << '\n';
    return 1;
  }
  return 0;
}
