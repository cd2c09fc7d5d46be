#include <gtest/gtest.h>

#include <atomic>
#include <cmath>
#include <filesystem>
#include <thread>

#include "httplib.h"
#include "nlchart/service.hpp"

namespace nlchart {
namespace {

using nlohmann::json;

json body(const Reply& r) { return json::parse(r.text); }

std::string new_session(Service& svc, const std::string& dataset = Service::kSampleDataset) {
  auto r = svc.create_session(json{{"dataset_id", dataset}}.dump());
  EXPECT_EQ(r.status, 201) << r.text;
  return body(r)["session_id"].get<std::string>();
}

Reply say(Service& svc, const std::string& session, const std::string& text) {
  return svc.post_utterance(session, json{{"text", text}}.dump());
}

TEST(Service, UtteranceReturnsActionsStatusesTraceAndSpec) {
  Service svc;
  auto s = new_session(svc);
  auto r = say(svc, s, "Sales by year");
  ASSERT_EQ(r.status, 200) << r.text;
  auto j = body(r);
  EXPECT_EQ(j["actions"], json({"{bindY, yAxis, field=Sales}", "{bindX, xAxis, field=Year}"}));
  EXPECT_EQ(j["statuses"], json({"applied", "applied"}));
  EXPECT_EQ(j["outcome"]["recommendations"][0]["action"], "{setChartType, *, chartType=bar}");
  EXPECT_EQ(j["spec"]["chartType"], "bar");
  ASSERT_EQ(j["trace"].size(), 2u);
  EXPECT_EQ(j["trace"][0]["text"], "Sales");
  EXPECT_EQ(j["trace"][0]["role"], "yField");
  EXPECT_EQ(j["trace"][0]["binding"], "Sales");
  EXPECT_EQ(j["trace"][1]["text"], "year");
  EXPECT_EQ(j["trace"][1]["begin"], 9);
}

TEST(Service, GoldenColorChange) {
  Service svc;
  auto s = new_session(svc);
  say(svc, s, "show Price by Date");
  auto j = body(say(svc, s, "turn the red line blue"));
  EXPECT_EQ(j["actions"], json({"{setColor, [shape=line, color=red], color=blue}"}));
  EXPECT_TRUE(j.contains("spec"));
}

TEST(Service, ErrorCodes) {
  Service svc;
  auto s = new_session(svc);
  auto code = [](const Reply& r) { return body(r)["error"]["code"].get<std::string>(); };

  auto empty = say(svc, s, "");
  EXPECT_EQ(empty.status, 422);
  EXPECT_EQ(code(empty), "PARSE_EMPTY");
  auto nothing = say(svc, s, "hello there");
  EXPECT_EQ(nothing.status, 422);
  EXPECT_EQ(code(nothing), "PARSE_EMPTY");

  auto unknown = say(svc, "nope", "sort");
  EXPECT_EQ(unknown.status, 404);
  EXPECT_EQ(code(unknown), "UNKNOWN_SESSION");
  EXPECT_EQ(code(svc.history("nope")), "UNKNOWN_SESSION");
  EXPECT_EQ(code(svc.chart_spec("nope", "chart1")), "UNKNOWN_SESSION");
  EXPECT_EQ(code(svc.chart_spec(s, "chart9")), "UNKNOWN_CHART");

  auto bad = svc.post_utterance(s, "{not json");
  EXPECT_EQ(bad.status, 400);
  EXPECT_EQ(code(bad), "BAD_REQUEST");
  EXPECT_EQ(code(svc.post_utterance(s, R"({"txt": "sort"})")), "BAD_REQUEST");
  EXPECT_EQ(code(svc.create_session("{}")), "BAD_REQUEST");
  EXPECT_EQ(code(svc.create_session(R"({"dataset_id": "missing"})")), "UNKNOWN_DATASET");

  auto csv = svc.create_dataset("a,b\n1,2,3\n", "text/csv");
  EXPECT_EQ(csv.status, 400);
  EXPECT_EQ(code(csv), "BAD_CSV");
  EXPECT_EQ(code(svc.create_dataset(R"({"name": "x"})", "application/json")), "BAD_REQUEST");

  // failed requests leave no history behind
  EXPECT_TRUE(body(svc.history(s))["entries"].empty());
}

TEST(Service, MalformedHistoryIsRejected) {
  Service svc;
  json history{{"schema", "nlchart-history/1"}, {"entries", json::array()}};
  auto r = svc.create_session(json{{"dataset_id", "carsales"}, {"history", {{"entries", "oops"}}}}.dump());
  EXPECT_EQ(r.status, 400);
  r = svc.create_session(json{{"dataset_id", "carsales"}, {"history", history}}.dump());
  EXPECT_EQ(r.status, 201);
}

TEST(Service, OrphanOnlyUtteranceAsksForClarification) {
  Service svc;
  auto s = new_session(svc);
  // a bare color names no operation, so synthesis yields only an orphan
  auto r = say(svc, s, "blue");
  EXPECT_EQ(r.status, 200);
  auto b = body(r);
  EXPECT_FALSE(b.contains("error"));
  EXPECT_EQ(b["actions"], json::array({"{*, *, color=blue}"}));
  EXPECT_EQ(b["statuses"], json::array({"clarification_needed"}));
  EXPECT_EQ(b["version"], 0);
}

TEST(Service, UploadedDatasetBacksASession) {
  Service svc;
  auto r = svc.create_dataset("City,Visitors\nParis,30\nRome,20\nOslo,5\n", "text/csv");
  ASSERT_EQ(r.status, 201) << r.text;
  auto j = body(r);
  EXPECT_EQ(j["rows"], 3);
  EXPECT_EQ(j["columns"][1], json({{"name", "Visitors"}, {"type", "quantitative"}}));
  auto s = new_session(svc, j["dataset_id"].get<std::string>());
  auto out = body(say(svc, s, "Visitors by City"));
  EXPECT_EQ(out["actions"], json({"{bindY, yAxis, field=Visitors}", "{bindX, xAxis, field=City}"}));
  EXPECT_EQ(out["spec"]["data"].size(), 3u);

  auto wrapped = svc.create_dataset(json{{"name", "t"}, {"csv", "x,y\n1,2\n"}}.dump(), "application/json");
  EXPECT_EQ(wrapped.status, 201);
  EXPECT_NE(body(wrapped)["dataset_id"], j["dataset_id"]);
}

TEST(Service, HistoryReplaysToTheSameSpec) {
  Service svc;
  auto s = new_session(svc);
  for (const char* u : {"Sales by Brand", "sort", "make the title darker", "add labels", "make it bigger",
                        "place the legend on the right of the plot area"}) {
    say(svc, s, u);
  }
  auto history = body(svc.history(s));
  EXPECT_EQ(history["entries"].size(), 6u);
  auto r = svc.create_session(json{{"dataset_id", history["dataset_id"]}, {"history", history}}.dump());
  ASSERT_EQ(r.status, 201) << r.text;
  auto copy = body(r)["session_id"].get<std::string>();
  EXPECT_EQ(svc.chart_spec(copy, "chart1").text, svc.chart_spec(s, "chart1").text);
}

TEST(Service, SameUtterancesSameBytes) {
  Service a, b;
  auto sa = new_session(a), sb = new_session(b);
  for (const char* u : {"Sales by Year", "make the title red", "sort"}) {
    EXPECT_EQ(say(a, sa, u).text, say(b, sb, u).text);
  }
}

TEST(Service, Suggest) {
  Service svc;
  auto j = body(svc.suggest("add tr", 10));
  bool found = false;
  for (const auto& s : j["suggestions"]) found = found || s["phrase"] == "add trend line";
  EXPECT_TRUE(found);
  EXPECT_TRUE(body(svc.suggest("zzz", 10))["suggestions"].empty());
}

TEST(Service, SnapshotRestoresSessions) {
  auto dir = std::filesystem::temp_directory_path() / "nlchart-service-test";
  std::filesystem::remove_all(dir);
  std::string session, dataset, spec;
  {
    Service svc({dir.string()});
    dataset = body(svc.create_dataset("Team,Score\nA,3\nB,7\n", "text/csv"))["dataset_id"].get<std::string>();
    session = new_session(svc, dataset);
    say(svc, session, "Score by Team");
    say(svc, session, "make the title blue");
    spec = svc.chart_spec(session, "chart1").text;
    svc.snapshot();
  }
  Service restored({dir.string()});
  EXPECT_EQ(restored.chart_spec(session, "chart1").text, spec);
  // new ids continue after the restored ones
  EXPECT_NE(new_session(restored, dataset), session);
  std::filesystem::remove_all(dir);
}

// Runs the real server on an ephemeral port.
class HttpTest : public ::testing::Test {
 protected:
  void SetUp() override {
    service_.mount(server_);
    port_ = server_.bind_to_any_port("127.0.0.1");
    ASSERT_GT(port_, 0);
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  void TearDown() override {
    server_.stop();
    thread_.join();
  }

  httplib::Client client() { return httplib::Client("127.0.0.1", port_); }

  Service service_;
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
};

TEST_F(HttpTest, EndToEnd) {
  auto cli = client();
  auto ds = cli.Post("/datasets", "Fruit,Count\napple,4\npear,9\n", "text/csv");
  ASSERT_TRUE(ds);
  EXPECT_EQ(ds->status, 201);

  auto created = cli.Post("/sessions", R"({"dataset_id": "carsales"})", "application/json");
  ASSERT_TRUE(created);
  ASSERT_EQ(created->status, 201);
  auto sid = json::parse(created->body)["session_id"].get<std::string>();

  auto u = cli.Post("/sessions/" + sid + "/utterances", R"({"text": "Sales by year"})", "application/json");
  ASSERT_TRUE(u);
  ASSERT_EQ(u->status, 200);
  EXPECT_EQ(json::parse(u->body)["spec"]["chartType"], "bar");

  auto spec = cli.Get("/sessions/" + sid + "/charts/chart1/spec");
  ASSERT_TRUE(spec);
  EXPECT_EQ(spec->status, 200);
  EXPECT_EQ(json::parse(spec->body)["schema"], "nlchart-spec/1");
  EXPECT_EQ(spec->body, service_.chart_spec(sid, "chart1").text);

  auto hist = cli.Get("/sessions/" + sid + "/history");
  ASSERT_TRUE(hist);
  EXPECT_EQ(json::parse(hist->body)["entries"].size(), 1u);

  auto sug = cli.Get("/suggest?prefix=add%20tr&k=3");
  ASSERT_TRUE(sug);
  EXPECT_EQ(json::parse(sug->body)["suggestions"][0]["phrase"], "add trend line");
  auto bad_k = cli.Get("/suggest?prefix=a&k=x");
  ASSERT_TRUE(bad_k);
  EXPECT_EQ(bad_k->status, 400);

  auto empty = cli.Post("/sessions/" + sid + "/utterances", R"({"text": ""})", "application/json");
  ASSERT_TRUE(empty);
  EXPECT_EQ(empty->status, 422);
  EXPECT_EQ(json::parse(empty->body)["error"]["code"], "PARSE_EMPTY");

  auto missing = cli.Get("/sessions/zz/history");
  ASSERT_TRUE(missing);
  EXPECT_EQ(missing->status, 404);
  EXPECT_EQ(json::parse(missing->body)["error"]["code"], "UNKNOWN_SESSION");

  auto nowhere = cli.Get("/nowhere");
  ASSERT_TRUE(nowhere);
  EXPECT_EQ(nowhere->status, 404);
}

// Requests to one session serialize: after N concurrent "make the title
// bigger" posts the title has grown by exactly 1.2^N and the version is N.
TEST_F(HttpTest, ConcurrentPostsToOneSessionSerialize) {
  auto cli = client();
  auto created = cli.Post("/sessions", R"({"dataset_id": "carsales"})", "application/json");
  auto sid = json::parse(created->body)["session_id"].get<std::string>();
  auto before = json::parse(service_.chart_spec(sid, "chart1").text);
  const double size0 = before["components"]["title"]["size"].get<double>();

  constexpr int kThreads = 8;
  std::vector<std::thread> threads;
  std::atomic<int> ok{0};
  for (int i = 0; i < kThreads; ++i) {
    threads.emplace_back([&] {
      auto c = client();
      auto r = c.Post("/sessions/" + sid + "/utterances", R"({"text": "make the title bigger"})", "application/json");
      if (r && r->status == 200) ++ok;
    });
  }
  // other sessions keep working meanwhile
  auto other = cli.Post("/sessions", R"({"dataset_id": "carsales"})", "application/json");
  ASSERT_TRUE(other);
  EXPECT_EQ(other->status, 201);
  for (auto& t : threads) t.join();
  EXPECT_EQ(ok.load(), kThreads);

  auto after = json::parse(service_.chart_spec(sid, "chart1").text);
  EXPECT_EQ(after["version"], kThreads);
  EXPECT_NEAR(after["components"]["title"]["size"].get<double>(), size0 * std::pow(1.2, kThreads), 1e-9);
}

}  // namespace
}  // namespace nlchart
