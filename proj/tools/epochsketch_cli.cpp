//  Copyright 2026 The epochsketch Authors
//
//  Licensed under the Apache License, Version 2.0 (the "License");
//  you may not use this file except in compliance with the License.
//  You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
//  Unless required by applicable law or agreed to in writing, software
//  distributed under the License is distributed on an "AS IS" BASIS,
//  WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
//  See the License for the specific language governing permissions and
//  limitations under the License.

// Command-line front end: ingest, serve, query, eval, snapshot save|load.

#include <csignal>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "epochsketch/epochsketch.hpp"

namespace es = epochsketch;

namespace {

struct ConfigFlags {
  std::string path;
  std::string profile = "full";
  std::vector<std::string> overrides;  // key=value

  void add(CLI::App* app) {
    app->add_option("-c,--config", path, "key=value config file");
    app->add_option("--profile", profile, "base settings: full (d=4, b=23, m_max=11) or desk (b=16, m_max=8)")
        ->check(CLI::IsMember({"full", "desk"}));
    app->add_option("-s,--set", overrides, "override one key, e.g. --set log_width=12");
  }

  es::EngineConfig resolve() const {
    es::EngineConfig c = profile == "desk" ? es::EngineConfig::desk_profile() : es::EngineConfig{};
    if (!path.empty()) c = es::EngineConfig::load(path, c);
    c.apply_env();
    for (const auto& kv : overrides) c = es::EngineConfig::parse(kv, c);
    c.validate();
    return c;
  }
};

std::string snapshot_target(const std::string& flag, const es::EngineConfig& c) {
  const std::string& path = flag.empty() ? c.snapshot_path : flag;
  if (path.empty()) throw es::Error(es::ErrorCode::kConfig, "no snapshot path (use --snapshot or snapshot_path)");
  return path;
}

std::string join(const std::vector<std::string>& words) {
  std::string line;
  for (const auto& w : words) {
    if (!line.empty()) line += ' ';
    line += w;
  }
  return line;
}

volatile std::sig_atomic_t g_stop = 0;
extern "C" void on_signal(int) { g_stop = 1; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"epochsketch: time-aggregated Count-Min sketches over epoch streams"};
  app.require_subcommand(1);

  ConfigFlags ingest_cfg;
  std::string ingest_format = "replay";
  std::string ingest_snapshot;
  std::string ingest_resume;
  std::vector<std::string> ingest_files;
  auto* ingest = app.add_subcommand("ingest", "replay files into an engine and save a snapshot");
  ingest_cfg.add(ingest);
  ingest->add_option("-f,--format", ingest_format, "replay (epoch<TAB>token) or tokens")
      ->check(CLI::IsMember({"replay", "tokens"}));
  ingest->add_option("-o,--snapshot", ingest_snapshot, "snapshot to write");
  ingest->add_option("--resume", ingest_resume, "snapshot to continue from");
  ingest->add_option("files", ingest_files, "input files")->required()->check(CLI::ExistingFile);

  ConfigFlags serve_cfg;
  std::string serve_snapshot;
  std::string serve_listen;
  bool serve_save = false;
  auto* serve = app.add_subcommand("serve", "speak the line protocol over TCP until SIGINT or SIGTERM");
  serve_cfg.add(serve);
  serve->add_option("--snapshot", serve_snapshot, "snapshot to load at start (and save with --save)");
  serve->add_option("-l,--listen", serve_listen, "host:port, overrides the config");
  serve->add_flag("--save", serve_save, "save the snapshot on shutdown");

  std::string query_snapshot;
  std::string query_connect;
  std::vector<std::string> query_words;
  auto* query = app.add_subcommand("query", "run protocol lines against a snapshot or a server");
  query->add_option("--snapshot", query_snapshot, "snapshot to query");
  query->add_option("--connect", query_connect, "host:port of a running server");
  query->add_option("line", query_words, "one protocol line, e.g. Q foo 3; stdin when omitted");
  query->allow_extras(false);
  query->positionals_at_end();

  ConfigFlags eval_cfg;
  es::EvalSpec eval_spec;
  std::string eval_out;
  std::string eval_estimates;
  auto* eval = app.add_subcommand("eval", "score time, item and interpolation estimators against exact counts");
  eval_cfg.add(eval);
  eval->add_option("--input", eval_spec.input_path, "replay file instead of the generator")->check(CLI::ExistingFile);
  eval->add_option("--keys", eval_spec.stream.keys, "generator key count");
  eval->add_option("--zipf", eval_spec.stream.exponent, "generator Zipf exponent");
  eval->add_option("--epochs", eval_spec.stream.epochs, "generator epochs");
  eval->add_option("--tokens-per-epoch", eval_spec.stream.tokens_per_epoch, "generator volume per epoch");
  eval->add_option("--drift", eval_spec.stream.drift, "fraction of adjacent rank swaps per epoch");
  eval->add_option("--volume-amplitude", eval_spec.stream.volume_amplitude, "periodic volume swing in [0, 1)");
  eval->add_option("--volume-period", eval_spec.stream.volume_period, "volume period in epochs");
  eval->add_option("--seed", eval_spec.stream.seed, "generator seed");
  eval->add_option("--max-probes", eval_spec.max_probes, "cap on scored (key, epoch) pairs");
  eval->add_option("-o,--out", eval_out, "CSV report path (stdout when omitted)");
  eval->add_option("--estimates", eval_estimates, "per-probe CSV of the interpolating estimator");

  auto* snapshot = app.add_subcommand("snapshot", "create or inspect snapshots");
  snapshot->require_subcommand(1);
  ConfigFlags save_cfg;
  std::string save_out;
  std::vector<std::string> save_inputs;
  auto* save = snapshot->add_subcommand("save", "build an engine from config and replay inputs, then save it");
  save_cfg.add(save);
  save->add_option("-o,--out", save_out, "snapshot path")->required();
  save->add_option("inputs", save_inputs, "replay files")->check(CLI::ExistingFile);
  std::string load_path;
  std::string load_resave;
  auto* load = snapshot->add_subcommand("load", "load a snapshot, verify it and print its summary");
  load->add_option("path", load_path, "snapshot path")->required()->check(CLI::ExistingFile);
  load->add_option("--resave", load_resave, "write the loaded engine back out");

  CLI11_PARSE(app, argc, argv);

  try {
    if (ingest->parsed()) {
      const es::EngineConfig config = ingest_cfg.resolve();
      es::Engine engine = ingest_resume.empty() ? es::Engine(config) : es::Engine::load(ingest_resume);
      const auto format = es::parse_ingest_format(ingest_format);
      for (const auto& f : ingest_files) {
        const es::IngestSummary s = es::ingest_file(engine, f, format);
        std::cout << f << ": " << s.to_text() << '\n';
        for (const auto& e : s.errors) std::cerr << f << ": " << e << '\n';
      }
      const std::string out = snapshot_target(ingest_snapshot, config);
      engine.save(out);
      std::cout << "saved " << out << " t=" << engine.epoch() << " mass=" << engine.total_mass() << '\n';
      return 0;
    }

    if (serve->parsed()) {
      es::EngineConfig config = serve_cfg.resolve();
      if (!serve_listen.empty()) config.listen = serve_listen;
      const std::string snap = serve_snapshot.empty() ? config.snapshot_path : serve_snapshot;
      es::Engine engine = !snap.empty() && std::ifstream(snap).good() ? es::Engine::load(snap) : es::Engine(config);
      es::Server server(engine, es::ServerOptions::from_config(config));
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      server.start();
      std::cerr << "listening on " << es::split_address(config.listen).first << ':' << server.port()
                << (config.mode == es::ClockMode::kLive ? " (live)" : " (replay)") << '\n';
      while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(100));
      server.stop();
      if (serve_save) {
        engine.save(snapshot_target(snap, config));
        std::cerr << "saved " << snapshot_target(snap, config) << '\n';
      }
      return 0;
    }

    if (query->parsed()) {
      std::vector<std::string> lines;
      if (!query_words.empty()) {
        lines.push_back(join(query_words));
      } else {
        for (std::string l; std::getline(std::cin, l);) lines.push_back(l);
      }
      if (!query_connect.empty()) {
        const auto [host, port] = es::split_address(query_connect);
        es::LineClient client(host, port);
        for (const auto& l : lines) {
          client.send_line(l);
          const auto c = es::parse_command(l);
          if (!c.mutates()) std::cout << client.read_line() << '\n';
        }
        client.send_line("STATS");
        client.read_line();  // barrier: mutations above are applied before we hang up
        return 0;
      }
      if (query_snapshot.empty()) throw es::Error(es::ErrorCode::kConfig, "query needs --snapshot or --connect");
      es::Engine engine = es::Engine::load(query_snapshot);
      es::Session session(engine);
      for (const auto& l : lines) {
        if (auto reply = session.handle(l)) std::cout << *reply << '\n';
      }
      return 0;
    }

    if (eval->parsed()) {
      const es::EngineConfig config = eval_cfg.resolve();
      eval_spec.keep_estimates = !eval_estimates.empty();
      const es::EvalResult r = es::eval_run(config, eval_spec);
      if (eval_out.empty()) {
        es::write_eval_csv(std::cout, r);
      } else {
        std::ofstream out(eval_out);
        es::write_eval_csv(out, r);
        if (!out) throw es::Error(es::ErrorCode::kIo, "cannot write '" + eval_out + "'");
      }
      if (!eval_estimates.empty()) {
        std::ofstream out(eval_estimates);
        es::write_estimates_csv(out, r.estimates);
        if (!out) throw es::Error(es::ErrorCode::kIo, "cannot write '" + eval_estimates + "'");
      }
      std::cerr << "epochs=" << r.epochs << " probes=" << r.probes;
      for (const auto& name : es::eval_estimators()) {
        std::cerr << ' ' << name << "_relative=" << es::format_number(r.reports.at(name).relative);
      }
      std::cerr << '\n';
      for (const auto& [label, score] : {std::pair{"below_threshold", r.below_threshold}, std::pair{"heavy", r.heavy},
                                 std::pair{"top_band", r.top_band}}) {
        std::cerr << label << ": pairs=" << score.pairs << " time=" << es::format_number(score.time)
                  << " item=" << es::format_number(score.item)
                  << " interpolation=" << es::format_number(score.interpolation)
                  << " pure_interpolation=" << es::format_number(score.pure_interpolation) << '\n';
      }
      return 0;
    }

    if (save->parsed()) {
      es::Engine engine(save_cfg.resolve());
      for (const auto& f : save_inputs) {
        std::cout << f << ": " << es::ingest_file(engine, f, es::IngestFormat::kReplay).to_text() << '\n';
      }
      engine.save(save_out);
      std::cout << "saved " << save_out << " t=" << engine.epoch() << " mass=" << engine.total_mass() << '\n';
      return 0;
    }

    if (load->parsed()) {
      const es::Engine engine = es::Engine::load(load_path);
      std::cout << "t=" << engine.epoch() << " mass=" << engine.total_mass() << '\n' << engine.config().to_text();
      if (!load_resave.empty()) engine.save(load_resave);
      return 0;
    }
  } catch (const es::Error& e) {
    std::cerr << "error (" << es::to_string(e.code()) << "): " << e.what() << '\n';
    return 1;
  }
  return 0;
}
