#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include "doctest.h"
#include "httplib.h"
#include "json.hpp"
#include "thea/pack_loader.hpp"
#include "thea/service/chat_service.hpp"
#include "thea/service/config.hpp"
#include "thea/service/http_server.hpp"
#include "thea/service/repl.hpp"
#include "thea/service/transcript.hpp"

using namespace thea;
using namespace thea::service;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr const char* kLine1 =
    "We have a problem with the engine! I don't, I don't, I don't know what to do.";
constexpr const char* kReply1 =
    "I understand. Let me help you. What would be the best option? Let's keep calm and think "
    "this through together.";

struct TempDir {
  fs::path path;
  TempDir() {
    static int n = 0;
    path = fs::temp_directory_path() /
           ("thea_test_" + std::to_string(::getpid()) + "_" + std::to_string(n++));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

EngineConfig seeded(std::uint64_t seed = 100) {
  EngineConfig c;
  c.rng_seed = seed;
  return c;
}

// Runs an HttpServer on an ephemeral port for the lifetime of the object.
struct LiveServer {
  ChatService service;
  HttpServer http;
  int port = -1;
  std::thread thread;

  explicit LiveServer(EngineConfig cfg)
      : service(cfg, service_packs(cfg)), http(service, std::chrono::milliseconds(200)) {
    port = http.bind("127.0.0.1", 0);
    REQUIRE(port > 0);
    thread = std::thread([this] { http.listen(); });
    for (int i = 0; i < 200 && !http.running(); ++i) {
      std::this_thread::sleep_for(std::chrono::milliseconds(5));
    }
  }
  ~LiveServer() {
    http.stop();
    thread.join();
  }
  httplib::Client client() const {
    httplib::Client c("127.0.0.1", port);
    c.set_read_timeout(5, 0);
    return c;
  }
};

std::vector<std::pair<std::size_t, std::string>> parse_sse(const std::string& stream) {
  std::vector<std::pair<std::size_t, std::string>> out;
  std::istringstream in(stream);
  std::string line;
  std::size_t id = 0;
  std::string data;
  while (std::getline(in, line)) {
    if (line.rfind("id: ", 0) == 0) id = std::stoul(line.substr(4));
    else if (line.rfind("data: ", 0) == 0) data = line.substr(6);
    else if (line.empty() && !data.empty()) {
      out.emplace_back(id, data);
      data.clear();
    }
  }
  return out;
}

// Reads the event stream until `want` turn events arrived.
std::string read_events(const LiveServer& s, const std::string& path, std::size_t want,
                        httplib::Headers headers = {}) {
  auto cli = s.client();
  std::string buf;
  const auto deadline = std::chrono::steady_clock::now() + std::chrono::seconds(10);
  cli.Get(path, headers, [&](const char* data, std::size_t len) {
    buf.append(data, len);
    return parse_sse(buf).size() < want && std::chrono::steady_clock::now() < deadline;
  });
  return buf;
}

}  // namespace

TEST_CASE("config parsing") {
  auto c = parse_config(R"({"fallback_threshold": 0.6, "context_boost": 0.2,
      "affect": {"stutter_threshold": 3}, "listen_address": "0.0.0.0:9000", "rng_seed": 7,
      "auth_token": "t"})");
  CHECK(c.fallback_threshold == 0.6);
  CHECK(c.context_boost == 0.2);
  CHECK(c.affect.stutter_threshold == 3);
  CHECK(c.listen_address.host == "0.0.0.0");
  CHECK(c.listen_address.port == 9000);
  CHECK(c.rng_seed == 7u);
  CHECK(c.auth_token == "t");
  CHECK(c.engine_options().fallback_threshold == 0.6);
  CHECK(c.engine_options().affect.stutter_threshold == 3);

  auto d = parse_config("{}");
  CHECK(d.fallback_threshold == 0.55);
  CHECK(d.context_lifespan_default == 5);
  CHECK(d.listen_address.port == 8080);
  CHECK_FALSE(d.rng_seed);

  CHECK_THROWS_AS(parse_config("{"), ConfigError);
  CHECK_THROWS_AS(parse_config("[]"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"fallback": 0.5})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"affect": {"x": 1}})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"context_lifespan_default": 2.5})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"rng_seed": -1})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"fallback_threshold": "high"})"), ConfigError);
  CHECK_THROWS_AS(parse_listen_address("localhost"), ConfigError);
  CHECK_THROWS_AS(parse_listen_address("h:70000"), ConfigError);
  CHECK_THROWS_AS(parse_listen_address("h:x"), ConfigError);
  CHECK(parse_listen_address("h:0").port == 0);
}

TEST_CASE("config validation") {
  CHECK_NOTHROW(validate_config(EngineConfig{}));
  auto bad = [](auto mutate) {
    EngineConfig c;
    mutate(c);
    CHECK_THROWS_AS(validate_config(c), ConfigError);
  };
  bad([](EngineConfig& c) { c.fallback_threshold = 0.0; });
  bad([](EngineConfig& c) { c.fallback_threshold = 1.0; });
  bad([](EngineConfig& c) { c.context_lifespan_default = 0; });
  bad([](EngineConfig& c) { c.context_boost = 1.0; });
  bad([](EngineConfig& c) { c.affect.stutter_threshold = 1; });
  bad([](EngineConfig& c) { c.affect.sad_threshold = 0.1; });
  bad([](EngineConfig& c) { c.auth_token = ""; });
  bad([](EngineConfig& c) { c.packs_dir = "/nonexistent/thea/packs"; });

  TempDir t;
  EngineConfig c;
  c.transcript_dir = t.path / "a" / "b";
  validate_config(c);
  CHECK(fs::is_directory(*c.transcript_dir));

  std::ofstream(t.path / "cfg.json") << R"({"rng_seed": 3})";
  CHECK(load_config(t.path / "cfg.json").rng_seed == 3u);
  CHECK_THROWS_AS(load_config(t.path / "missing.json"), ConfigError);
}

TEST_CASE("persona override") {
  const auto base = persona::PersonaProfile::default_profile();
  auto p = apply_persona_override(json::parse(R"({"name": "THEA-2", "self_disclosure": false,
      "trait_weights": {"sincerity": 0.2}})"), base);
  CHECK(p.name == "THEA-2");
  CHECK_FALSE(p.self_disclosure);
  CHECK(p.weight(Trait::kSincerity) == 0.2);
  CHECK(p.weight(Trait::kCreativity) == base.weight(Trait::kCreativity));
  CHECK(apply_persona_override(json::object(), base) == base);

  auto field_of = [&](const char* text) {
    try {
      apply_persona_override(json::parse(text), base);
    } catch (const persona::PersonaError& e) {
      return e.field();
    }
    return std::string("<none>");
  };
  CHECK(field_of(R"({"name": ""})") == "name");
  CHECK(field_of(R"({"name": 3})") == "name");
  CHECK(field_of(R"({"trait_weights": {"sincerity": 1.5}})") == "trait_weights.sincerity");
  CHECK(field_of(R"({"trait_weights": {"humor": 0.5}})") == "trait_weights.humor");
  CHECK(field_of(R"({"mood": "happy"})") == "mood");
  CHECK(field_of(R"({"self_disclosure": "yes"})") == "self_disclosure");
}

TEST_CASE("custom packs directory") {
  TempDir t;
  std::ofstream(t.path / "extra.thea.json") << R"({
    "id": "extra", "title": "Extra", "entities": [],
    "intents": [{"name": "ping", "training_phrases": ["ping the station"],
                 "responses": [{"text": "Pong.", "traits": ["sociability"], "decision_class": "informative", "crew_benefit": 0.5, "self_benefit": 0}]}],
    "nodes": [{"id": "root", "prompt_intents": ["ping"]}],
    "metadata": {"fallback": "global"}})";
  EngineConfig cfg = seeded();
  cfg.packs_dir = t.path;
  ChatService svc(cfg, service_packs(cfg));
  auto id = svc.create_session();
  CHECK(svc.post_message(id, "ping the station").outcome.response.text == "Pong.");

  std::ofstream(t.path / "z.thea.json") << R"({
    "id": "crisis", "title": "Shadow", "entities": [],
    "intents": [{"name": "x", "training_phrases": ["x"], "responses": [{"text": "x", "traits": ["sincerity"], "decision_class": "informative", "crew_benefit": 0.5, "self_benefit": 0}]}], "nodes": [{"id": "root", "prompt_intents": ["x"]}], "metadata": {"fallback": "global"}})";
  CHECK_THROWS_WITH_AS(service_packs(cfg), doctest::Contains("shadows"), PackLoadError);
}

TEST_CASE("transcript lines") {
  dialogue::TranscriptEntry u{Speaker::kUser, "hi \"there\"", EmotionLabel::kNeutral, std::nullopt,
                              "2026-01-01T00:00:00Z"};
  CHECK(transcript_line(u) ==
        R"({"speaker":"user","text":"hi \"there\"","emotion":"neutral","intent":null,"ts":"2026-01-01T00:00:00Z"})");
  dialogue::TranscriptEntry a{Speaker::kAssistant, "ok", EmotionLabel::kStressed, "greet", "t"};
  CHECK(transcript_line(a) ==
        R"({"speaker":"assistant","text":"ok","emotion":"stressed","intent":"greet","ts":"t"})");
  CHECK(parse_transcript_line(transcript_line(a)) == a);
  CHECK(parse_transcript_line(transcript_line(u)) == u);

  dialogue::TranscriptEntry bad{Speaker::kUser, std::string("a\xff" "b"), EmotionLabel::kNeutral,
                                std::nullopt, "t"};
  CHECK(json::parse(transcript_line(bad))["text"] == "a\xEF\xBF\xBD" "b");

  CHECK_THROWS_AS(parse_transcript_line("{}"), TranscriptError);
  CHECK_THROWS_AS(parse_transcript_line("nope"), TranscriptError);
  CHECK_THROWS_AS(parse_transcript_line(
                      R"({"speaker":"robot","text":"","emotion":"neutral","intent":null,"ts":""})"),
                  TranscriptError);
  CHECK(transcript_path("/tmp/x", "s01") == fs::path("/tmp/x/s01.jsonl"));
}

TEST_CASE("transcript files and replay") {
  TempDir t;
  EngineConfig cfg = seeded(41);
  cfg.transcript_dir = t.path;
  ChatService svc(cfg, service_packs(cfg));

  auto empty = svc.create_session();
  CHECK_FALSE(fs::exists(transcript_path(t.path, empty)));

  auto id = svc.create_session();
  svc.post_message(id, kLine1);
  svc.post_message(id, "Shutting down engine 1 might be an option. And power the others.");
  const auto file = transcript_path(t.path, id);
  const auto entries = read_transcript(file);
  REQUIRE(entries.size() == 4);
  CHECK(entries[0].speaker == Speaker::kUser);
  CHECK(entries[0].text == kLine1);
  CHECK(entries[0].emotion == EmotionLabel::kStressed);
  CHECK(entries[1].text == kReply1);
  CHECK(entries[1].intent == "report_engine_problem");

  std::ifstream in(file);
  std::string all((std::istreambuf_iterator<char>(in)), {});
  CHECK(all == svc.transcript_ndjson(id));
  CHECK(std::count(all.begin(), all.end(), '\n') == 4);

  auto seed = dialogue::seed_from_session_id(id);
  REQUIRE(seed);
  CHECK(*seed == svc.session_seed(id));
  auto report = compare_replay(svc.engine(), persona::PersonaProfile::default_profile(), *seed,
                               entries);
  CHECK(report.identical());
  CHECK(report.replayed.size() == 2);

  auto tampered = entries;
  tampered[3].text = "something else";
  auto r2 = compare_replay(svc.engine(), persona::PersonaProfile::default_profile(), *seed,
                           tampered);
  CHECK_FALSE(r2.identical());
  CHECK(r2.first_mismatch == 1u);

  std::ofstream(t.path / "broken.jsonl") << transcript_line(entries[0]) << "\n{oops\n";
  CHECK_THROWS_WITH_AS(read_transcript(t.path / "broken.jsonl"), doctest::Contains("broken.jsonl:2:"),
                       TranscriptError);
}

TEST_CASE("chat service errors") {
  ChatService svc(seeded(), service_packs(seeded()));
  CHECK_THROWS_AS(svc.post_message("s0000000000000000", "hi"), SessionNotFound);
  auto id = svc.create_session();
  CHECK_THROWS_AS(svc.post_message(id, ""), InvalidMessage);
  CHECK_THROWS_AS(svc.post_message(id, std::string(kMaxMessageBytes + 1, 'a')), MessageTooLarge);
  CHECK_NOTHROW(svc.post_message(id, std::string(kMaxMessageBytes, 'a')));
  CHECK_THROWS_AS(svc.create_session(json::parse(R"({"name": ""})")), persona::PersonaError);
  CHECK(svc.session_count() == 1);
  CHECK_THROWS_AS(svc.transcript_ndjson("nope"), SessionNotFound);
}

TEST_CASE("turn body") {
  ChatService svc(seeded(), service_packs(seeded()));
  auto id = svc.create_session();
  auto turn = svc.post_message(id, kLine1);
  auto j = json::parse(turn.body);
  CHECK(j["text"] == kReply1);
  CHECK(j["emotion"]["label"] == "stressed");
  CHECK(j["emotion"]["confidence"].get<double>() == doctest::Approx(0.8));
  CHECK(j["matched_intent"] == "report_engine_problem");
  CHECK(j["fallback"] == false);
  CHECK(j["turn"] == 1);
  CHECK(j["user_text"] == kLine1);
  CHECK(j["ssml"].get<std::string>().rfind("<speak>", 0) == 0);
  auto fb = json::parse(svc.post_message(id, "zzzz").body);
  CHECK(fb["turn"] == 2);
}

TEST_CASE("sessions are isolated under concurrency") {
  ChatService svc(seeded(5), service_packs(seeded(5)));
  constexpr int kThreads = 8;
  std::vector<std::string> ids;
  for (int i = 0; i < kThreads; ++i) ids.push_back(svc.create_session());
  const std::vector<std::string> script = {kLine1, "I woke up", "Alex", "how are you",
                                           "where is the switch in the galley"};
  std::vector<std::vector<std::string>> replies(kThreads);
  std::vector<std::thread> threads;
  for (int i = 0; i < kThreads; ++i) {
    threads.emplace_back([&, i] {
      for (int round = 0; round < 10; ++round) {
        for (const auto& line : script) {
          replies[i].push_back(svc.post_message(ids[i], line).outcome.response.text);
        }
      }
    });
  }
  for (auto& t : threads) t.join();

  const auto packs = service_packs(seeded(5));
  dialogue::Engine reference(packs, seeded(5).engine_options());
  for (int i = 0; i < kThreads; ++i) {
    auto s = reference.start_session({}, svc.session_seed(ids[i]));
    std::vector<std::string> expect;
    for (int round = 0; round < 10; ++round) {
      for (const auto& line : script) expect.push_back(reference.step(s, line).response.text);
    }
    CHECK(replies[i] == expect);
    const auto nd = svc.transcript_ndjson(ids[i]);
    CHECK(std::count(nd.begin(), nd.end(), '\n') == 10 * 5 * 2);
  }
}

TEST_CASE("HTTP API") {
  LiveServer s(seeded());
  auto cli = s.client();

  auto r = cli.Post("/sessions", "{}", "application/json");
  REQUIRE(r);
  CHECK(r->status == 201);
  CHECK(r->get_header_value("Access-Control-Allow-Origin") == "*");
  const std::string id = json::parse(r->body)["session_id"];

  r = cli.Post("/sessions", "", "application/json");
  REQUIRE(r);
  CHECK(r->status == 201);

  r = cli.Post("/sessions/" + id + "/messages", json{{"text", kLine1}}.dump(), "application/json");
  REQUIRE(r);
  CHECK(r->status == 200);
  CHECK(r->get_header_value("Content-Type").find("application/json") != std::string::npos);
  auto body = json::parse(r->body);
  CHECK(body["text"] == kReply1);
  CHECK(body["emotion"]["label"] == "stressed");
  const std::string first_body = r->body;

  r = cli.Post("/sessions/s0000000000009999/messages", R"({"text":"hi"})", "application/json");
  REQUIRE(r);
  CHECK(r->status == 404);
  CHECK(json::parse(r->body).contains("error"));

  for (const char* bad : {"not json", R"({"text": 3})", R"({"txt": "hi"})", R"({"text": ""})", "[]"}) {
    r = cli.Post("/sessions/" + id + "/messages", bad, "application/json");
    REQUIRE(r);
    CHECK(r->status == 400);
  }

  r = cli.Post("/sessions/" + id + "/messages",
               json{{"text", std::string(kMaxMessageBytes + 1, 'x')}}.dump(), "application/json");
  REQUIRE(r);
  CHECK(r->status == 413);

  r = cli.Post("/sessions", R"({"persona": {"trait_weights": {"sincerity": 2}}})", "application/json");
  REQUIRE(r);
  CHECK(r->status == 422);
  CHECK(json::parse(r->body)["field"] == "trait_weights.sincerity");

  r = cli.Post("/sessions", R"({"persona": {"name": "THEA-2"}})", "application/json");
  REQUIRE(r);
  REQUIRE(r->status == 201);
  const std::string named = json::parse(r->body)["session_id"];
  r = cli.Post("/sessions/" + named + "/messages", R"({"text": "what is your name"})",
               "application/json");
  CHECK(json::parse(r->body)["text"].get<std::string>().rfind("My name is THEA-2.", 0) == 0);

  r = cli.Post("/sessions", R"({"colour": "red"})", "application/json");
  REQUIRE(r);
  CHECK(r->status == 400);

  r = cli.Get("/sessions/" + id + "/transcript");
  REQUIRE(r);
  CHECK(r->status == 200);
  CHECK(r->get_header_value("Content-Type").find("application/x-ndjson") != std::string::npos);
  CHECK(std::count(r->body.begin(), r->body.end(), '\n') == 2);
  CHECK(json::parse(r->body.substr(0, r->body.find('\n')))["text"] == kLine1);

  r = cli.Get("/sessions/nope/transcript");
  REQUIRE(r);
  CHECK(r->status == 404);

  r = cli.Options("/sessions");
  REQUIRE(r);
  CHECK(r->status == 204);

  // The event stream replays the turn with the identical JSON body.
  const auto events = parse_sse(read_events(s, "/sessions/" + id + "/events", 1));
  REQUIRE(events.size() == 1);
  CHECK(events[0].first == 1);
  CHECK(events[0].second == first_body);
}

TEST_CASE("SSE live delivery and resume") {
  LiveServer s(seeded());
  auto cli = s.client();
  const std::string id = json::parse(cli.Post("/sessions", "{}", "application/json")->body)["session_id"];
  const std::vector<std::string> lines = {kLine1, "I woke up", "Alex", "how are you"};

  std::string stream;
  std::thread reader([&] { stream = read_events(s, "/sessions/" + id + "/events", lines.size()); });
  std::this_thread::sleep_for(std::chrono::milliseconds(300));
  std::vector<std::string> bodies;
  for (const auto& line : lines) {
    auto r = cli.Post("/sessions/" + id + "/messages", json{{"text", line}}.dump(), "application/json");
    REQUIRE(r);
    bodies.push_back(r->body);
  }
  reader.join();
  const auto events = parse_sse(stream);
  REQUIRE(events.size() == lines.size());
  for (std::size_t i = 0; i < events.size(); ++i) {
    CHECK(events[i].first == i + 1);
    CHECK(events[i].second == bodies[i]);
  }
  CHECK(stream.find("event: turn") != std::string::npos);
  CHECK(stream.find(": keepalive") != std::string::npos);

  auto resumed = parse_sse(read_events(s, "/sessions/" + id + "/events", 2, {{"Last-Event-ID", "2"}}));
  REQUIRE(resumed.size() == 2);
  CHECK(resumed[0].first == 3);
  CHECK(resumed[0].second == bodies[2]);
  auto by_query = parse_sse(read_events(s, "/sessions/" + id + "/events?last_event_id=3", 1));
  REQUIRE(by_query.size() == 1);
  CHECK(by_query[0].second == bodies[3]);

  auto r = cli.Get("/sessions/" + id + "/events", {{"Last-Event-ID", "x"}});
  REQUIRE(r);
  CHECK(r->status == 400);
  r = cli.Get("/sessions/s00000000000000ff/events");
  REQUIRE(r);
  CHECK(r->status == 404);
}

TEST_CASE("bearer auth") {
  EngineConfig cfg = seeded();
  cfg.auth_token = "sekret";
  LiveServer s(cfg);
  auto cli = s.client();
  auto r = cli.Post("/sessions", "{}", "application/json");
  REQUIRE(r);
  CHECK(r->status == 401);
  r = cli.Post("/sessions", {{"Authorization", "Bearer wrong"}}, "{}", "application/json");
  REQUIRE(r);
  CHECK(r->status == 401);
  r = cli.Post("/sessions", {{"Authorization", "Bearer sekret"}}, "{}", "application/json");
  REQUIRE(r);
  CHECK(r->status == 201);
  const std::string id = json::parse(r->body)["session_id"];
  r = cli.Get("/sessions/" + id + "/transcript?access_token=sekret");
  REQUIRE(r);
  CHECK(r->status == 200);
  r = cli.Options("/sessions");
  REQUIRE(r);
  CHECK(r->status == 204);
}

TEST_CASE("REPL") {
  ChatService svc(seeded(), service_packs(seeded()));
  std::istringstream in(std::string(kLine1) + "\n/ssml\nhow are you\n/transcript\n/quit\nnever read\n");
  std::ostringstream out;
  const auto id = run_repl(svc, in, out, ReplOptions{true, false, "you> "});
  const auto text = out.str();
  CHECK(text.find("session " + id) != std::string::npos);
  CHECK(text.find(std::string("thea> ") + kReply1) != std::string::npos);
  CHECK(text.find("[stressed 0.80 | report_engine_problem]") != std::string::npos);
  CHECK(text.find("<speak>") != std::string::npos);
  CHECK(text.find("\"speaker\":\"user\"") != std::string::npos);
  CHECK(svc.transcript_ndjson(id).find("never read") == std::string::npos);

  std::istringstream eof("hello");
  std::ostringstream out2;
  run_repl(svc, eof, out2, ReplOptions{false, false, ""});
  CHECK(out2.str().find("thea> ") != std::string::npos);
  CHECK(out2.str().find("[") == std::string::npos);
}
