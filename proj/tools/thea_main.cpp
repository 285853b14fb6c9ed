// thea: chat service, terminal REPL, transcript replay and pack linting.
#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "thea/pack_format.hpp"
#include "thea/pack_loader.hpp"
#include "thea/pack_validator.hpp"
#include "thea/service/chat_service.hpp"
#include "thea/service/http_server.hpp"
#include "thea/service/repl.hpp"
#include "thea/service/transcript.hpp"

namespace {

thea::service::HttpServer* g_server = nullptr;

void on_signal(int) {
  if (g_server) g_server->stop();
}

int lint(const std::vector<std::string>& files) {
  int bad = 0;
  for (const auto& f : files) {
    std::ifstream in(f, std::ios::binary);
    if (!in) {
      std::cerr << f << ": cannot read\n";
      ++bad;
      continue;
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
      const auto pack = thea::parse_pack(buf.str());
      const auto report = thea::validate_pack(pack);
      for (const auto& d : report.defects) {
        std::cout << f << ": " << to_string(d.severity) << ": " << to_string(d.kind) << ": "
                  << d.message << "\n";
        if (d.severity == thea::Severity::kError) ++bad;
      }
      if (report.clean()) std::cout << f << ": ok\n";
    } catch (const thea::PackError& e) {
      std::cout << f << ": " << to_string(e.kind()) << ": " << e.what() << "\n";
      ++bad;
    }
  }
  return bad == 0 ? 0 : 1;
}

int replay(const thea::service::ChatService& svc, const std::string& file,
           std::optional<std::uint64_t> seed) {
  const auto entries = thea::service::read_transcript(file);
  if (!seed) {
    const auto stem = std::filesystem::path(file).filename().string();
    seed = thea::dialogue::seed_from_session_id(stem.substr(0, stem.find('.')));
  }
  if (!seed) {
    std::cerr << "cannot recover the seed from " << file << "; pass --seed\n";
    return 2;
  }
  const auto report = thea::service::compare_replay(
      svc.engine(), thea::persona::PersonaProfile::default_profile(), *seed, entries);
  for (const auto& line : report.replayed) std::cout << line << "\n";
  if (report.identical()) {
    std::cerr << "replay identical (" << report.replayed.size() << " assistant lines)\n";
    return 0;
  }
  std::cerr << "replay differs at assistant line " << *report.first_mismatch << "\n";
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"SPACE THEA empathic dialogue engine"};
  std::string config_path;
  std::string packs_dir;
  std::string listen;
  std::string transcript_dir;
  std::string replay_file;
  std::optional<std::uint64_t> seed;
  bool repl = false;
  bool verbose = false;
  std::vector<std::string> lint_files;
  app.add_option("--config", config_path, "JSON config file (THEA_CONFIG overrides)");
  app.add_option("--packs", packs_dir, "Directory of extra *.thea.json packs");
  app.add_option("--seed", seed, "Base RNG seed");
  app.add_flag("--repl", repl, "Chat in the terminal instead of serving HTTP");
  app.add_option("--listen", listen, "host:port to serve on");
  app.add_option("--transcripts", transcript_dir, "Directory for JSON-lines transcripts");
  app.add_option("--replay", replay_file, "Replay a transcript and compare assistant lines");
  app.add_option("--lint", lint_files, "Validate pack files and exit")->expected(1, -1);
  app.add_flag("-v,--verbose", verbose, "Debug logging");
  CLI11_PARSE(app, argc, argv);

  spdlog::set_level(verbose ? spdlog::level::debug
                            : (repl ? spdlog::level::warn : spdlog::level::info));
  if (!lint_files.empty()) return lint(lint_files);

  try {
    if (const char* env = std::getenv("THEA_CONFIG"); env && *env) config_path = env;
    thea::service::EngineConfig cfg;
    if (!config_path.empty()) cfg = thea::service::load_config(config_path);
    if (!packs_dir.empty()) cfg.packs_dir = packs_dir;
    if (seed) cfg.rng_seed = seed;
    if (!listen.empty()) cfg.listen_address = thea::service::parse_listen_address(listen);
    if (!transcript_dir.empty()) cfg.transcript_dir = transcript_dir;
    thea::service::validate_config(cfg);

    thea::service::ChatService svc(cfg, thea::service::service_packs(cfg));
    if (!replay_file.empty()) return replay(svc, replay_file, seed);
    if (repl) {
      thea::service::run_repl(svc, std::cin, std::cout);
      return 0;
    }

    thea::service::HttpServer server(svc);
    const auto& addr = cfg.listen_address;
    const int port = server.bind(addr.host, addr.port);
    if (port < 0) {
      spdlog::critical("cannot bind {}:{}", addr.host, addr.port);
      return 1;
    }
    g_server = &server;
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    spdlog::info("listening on {}:{}", addr.host, port);
    server.listen();
    g_server = nullptr;
    return 0;
  } catch (const std::exception& e) {
    spdlog::critical("{}", e.what());
    return 1;
  }
}
