//
// Copyright 2026 The PACAS Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//
#include <gtest/gtest.h>

#include <sstream>
#include <thread>

#include <json.hpp>

#include "pacas/error.hpp"
#include "pacas/net.hpp"
#include "support/testkit.hpp"

using namespace pacas;
using nlohmann::json;

namespace {

struct NetTest : ::testing::Test {
  std::shared_ptr<const Relation> master = testkit::golden_master();
  Relation client = testkit::golden_client();
  Constraints constraints = testkit::golden_constraints();
  SupportSet support = testkit::golden_support(master);

  std::unique_ptr<ProviderSession> make_session(int k = 1) {
    return std::make_unique<ProviderSession>(master, support, AnonymitySpec{{"GEN"}, {"MED"}, {0}, k},
                                             constraints.mds);
  }
  json ask(const std::string& id, int level) {
    return {{"op", "ask_price"},
            {"request", {{"tuple_id", id}, {"attr", "MED"}, {"level", level}}},
            {"tuple", client_tuple(client, client.row_of(id))}};
  }
};

}  // namespace

TEST_F(NetTest, HandleRequestReplies) {
  auto s = make_session();
  EXPECT_EQ(json::parse(handle_request(*s, ask("t1", 0).dump())), (json{{"ok", true}, {"price", 1}}));
  json pay = ask("t1", 0);
  pay["op"] = "pay";
  pay["price"] = 1;
  pay["extra"] = "ignored";
  EXPECT_EQ(json::parse(handle_request(*s, pay.dump())), (json{{"ok", true}, {"value", "ibuprofen"}, {"level", 0}}));
  EXPECT_EQ(json::parse(handle_request(*s, R"({"op":"info"})"))["support_size"], 5);
}

TEST_F(NetTest, HandleRequestErrors) {
  auto s = make_session(3);
  auto error_of = [&](const std::string& line) { return json::parse(handle_request(*s, line))["error"]; };
  EXPECT_EQ(error_of("not json"), "protocol_error");
  EXPECT_EQ(error_of(R"({"op":"dance"})"), "protocol_error");
  EXPECT_EQ(error_of(R"({"op":"ask_price","request":{"tuple_id":"t1","attr":"MED"}})"), "protocol_error");
  json r = ask("t1", 0);
  r["request"]["attr"] = "AGE";
  EXPECT_EQ(error_of(r.dump()), "no_applicable_md");
  json pay = ask("t1", 0);
  pay["op"] = "pay";
  pay["price"] = "infinite";
  EXPECT_EQ(error_of(pay.dump()), "unsafe_request");
  pay["price"] = 0;
  EXPECT_EQ(error_of(pay.dump()), "unsafe_request");
  pay = ask("t1", 1);
  pay["op"] = "pay";
  pay["price"] = 3;
  EXPECT_EQ(error_of(pay.dump()), "quote_mismatch");
  const json reply = json::parse(handle_request(*s, "[]"));
  EXPECT_EQ(reply["ok"], false);
  EXPECT_TRUE(reply.contains("message"));
}

TEST_F(NetTest, StreamServing) {
  auto s = make_session();
  std::istringstream in(ask("t1", 0).dump() + "\n\n" + ask("t4", 0).dump() + "\n");
  std::ostringstream out;
  serve_stream(*s, in, out);
  EXPECT_EQ(out.str(), "{\"ok\":true,\"price\":1}\n{\"ok\":true,\"price\":0}\n");
}

TEST_F(NetTest, RemoteProviderMapsErrors) {
  Server server([&] { return make_session(3); }, "127.0.0.1", 0);
  server.start();
  auto remote = RemoteProvider::connect("127.0.0.1", server.port());
  const ClientTuple t2 = client_tuple(client, client.row_of("t2"));
  EXPECT_EQ(remote->ask_price({"t2", "MED", 0}, t2), std::nullopt);
  EXPECT_EQ(remote->ask_price({"t2", "MED", 1}, t2), Money());
  EXPECT_EQ(remote->pay(Money(), {"t2", "MED", 1}, t2), (Disclosure{"NSAID", 1}));
  EXPECT_EQ(remote->support_weight(), Money::units(6));
  try {
    remote->pay(Money::units(1), {"t2", "MED", 0}, t2);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kUnsafeRequest);
  }
  server.stop();
}

TEST_F(NetTest, ConcurrentClientsHaveIndependentLedgers) {
  Server server([&] { return make_session(1); }, "127.0.0.1", 0);
  server.start();
  auto a = RemoteProvider::connect("127.0.0.1", server.port());
  auto b = RemoteProvider::connect("127.0.0.1", server.port());
  const ClientTuple t1 = client_tuple(client, client.row_of("t1"));
  const ValueRequest r{"t1", "MED", 0};
  ASSERT_EQ(a->ask_price(r, t1), Money::units(1));
  EXPECT_EQ(a->pay(Money::units(1), r, t1).value, "ibuprofen");
  EXPECT_EQ(a->ask_price(r, t1), Money());
  // b's session never saw the sale.
  EXPECT_EQ(b->ask_price(r, t1), Money::units(1));
  std::thread other([&] { EXPECT_EQ(b->pay(Money::units(1), r, t1).value, "ibuprofen"); });
  EXPECT_EQ(a->support_weight(), Money::units(5));
  other.join();
  EXPECT_EQ(b->support_weight(), Money::units(5));
  server.stop();
}

TEST_F(NetTest, StopClosesIdleConnections) {
  auto server = std::make_unique<Server>([&] { return make_session(); }, "127.0.0.1", 0);
  server->start();
  auto idle = RemoteProvider::connect("127.0.0.1", server->port());
  server->stop();
  EXPECT_THROW(idle->support_weight(), Error);
}
