#include <gtest/gtest.h>

#include "powlgen/event_log.hpp"
#include "powlgen/semantics.hpp"
#include "support/fixture_models.hpp"

using namespace powlgen;

TEST(EventLogCsv, TwoCases) {
  EventLog log{{{"c1", {"A", "B"}}, {"c2", {"C"}}}};
  EXPECT_EQ(write_csv(log), "case_id,activity,event_index\nc1,A,0\nc1,B,1\nc2,C,0\n");
  EXPECT_EQ(read_csv(write_csv(log)), log);
}

TEST(EventLogCsv, EmptyLogIsHeaderOnly) {
  EXPECT_EQ(write_csv(EventLog{}), "case_id,activity,event_index\n");
  EXPECT_EQ(read_csv("case_id,activity,event_index\n").size(), 0u);
}

TEST(EventLogCsv, EmptyTraceAndQuoting) {
  EventLog log{{{"c1", {}}, {"c2", {"Pay, then \"ship\""}}}};
  auto text = write_csv(log);
  EXPECT_NE(text.find("c1,,\n"), std::string::npos);
  EXPECT_EQ(read_csv(text), log);
}

TEST(EventLogCsv, RowsMayBeShuffled) {
  auto log = read_csv("case_id,activity,event_index\nc1,B,1\nc1,A,0\n");
  EXPECT_EQ(log.cases[0].trace, (Trace{"A", "B"}));
}

TEST(EventLogCsv, MalformedRowsCarryLineNumbers) {
  auto line_of = [](const std::string& text) -> std::size_t {
    try {
      read_csv(text);
    } catch (const LogFormatError& e) {
      return e.line();
    }
    return 0;
  };
  EXPECT_EQ(line_of("wrong,header\n"), 1u);
  EXPECT_EQ(line_of("case_id,activity,event_index\nc1,A,0\nc1,B\n"), 3u);
  EXPECT_EQ(line_of("case_id,activity,event_index\nc1,A,x\n"), 2u);
  EXPECT_EQ(line_of("case_id,activity,event_index\nc1,A,0\nc1,B,0\n"), 3u);
  EXPECT_GT(line_of("case_id,activity,event_index\nc1,A,0\nc1,B,2\n"), 0u);
}

TEST(EventLogCsv, FixtureLogsRoundTrip) {
  for (const auto& [name, m] : fixtures::ground_truths(POWLGEN_FIXTURES_DIR)) {
    auto log = simulate_log(m);
    EXPECT_EQ(read_csv(write_csv(log)), log) << name;
  }
}

TEST(EventLogXes, ContainsConceptNames) {
  auto xes = write_xes(EventLog{{{"c1", {"A & B"}}}});
  EXPECT_NE(xes.find("<trace>"), std::string::npos);
  EXPECT_NE(xes.find("value=\"A &amp; B\""), std::string::npos);
}
