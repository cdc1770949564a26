#include <algorithm>
#include <cstdlib>
#include <thread>

#include <gtest/gtest.h>
#include <httplib.h>

#include "powlgen/dsl.hpp"
#include "powlgen/llm/generation.hpp"
#include "powlgen/llm/self_improvement.hpp"
#include "powlgen/semantics.hpp"
#include "support/oracles.hpp"
#include "support/scripts.hpp"

using namespace powlgen;
using namespace powlgen::llm;

namespace {

const std::string kDescription = "Orders are received, checked and then either shipped or cancelled.";

bool contains(const std::string& hay, const std::string& needle) { return hay.find(needle) != std::string::npos; }

std::size_t count_of(const std::string& hay, const std::string& needle) {
  std::size_t n = 0;
  for (auto at = hay.find(needle); at != std::string::npos; at = hay.find(needle, at + 1)) ++n;
  return n;
}

std::string joined(const Conversation& c) {
  std::string out;
  for (const auto& m : c) out += std::string(role_name(m.role)) + ":" + m.content + "\n";
  return out;
}

std::size_t error_prompts(const Conversation& c) {
  return std::count_if(c.begin(), c.end(), [](const ChatMessage& m) {
    return m.role == Role::user && contains(m.content, "The following errors were detected");
  });
}

std::vector<std::string> repeat(const std::string& s, int n) { return std::vector<std::string>(n, s); }

}  // namespace

TEST(Prompt, SectionsInOrder) {
  auto conv = build_initial_prompt(kDescription, {});
  ASSERT_EQ(conv.size(), 2u);
  EXPECT_EQ(conv[0].role, Role::system);
  EXPECT_TRUE(contains(conv[0].content, "process modeling expert"));
  const auto& u = conv[1].content;
  const auto knowledge = u.find("Use the following knowledge about the POWL modeling language");
  const auto shot = u.find("Process description for example 1:");
  const auto avoid = u.find("Common errors to avoid for example 1:");
  const auto negative = u.find("violate irreflexivity");
  const auto desc = u.find(kDescription);
  ASSERT_NE(knowledge, std::string::npos);
  ASSERT_NE(shot, std::string::npos);
  ASSERT_NE(avoid, std::string::npos);
  ASSERT_NE(negative, std::string::npos);
  ASSERT_NE(desc, std::string::npos);
  EXPECT_LT(knowledge, shot);
  EXPECT_LT(shot, avoid);
  EXPECT_LT(avoid, negative);
  EXPECT_LT(negative, desc);
  EXPECT_FALSE(contains(u, "Use exactly the following activity labels"));
}

TEST(Prompt, FunctionRosterLiterals) {
  const auto u = build_initial_prompt(kDescription, {})[1].content;
  for (const auto* lit : {"activity(label)", "xor(*args)", "loop(do, redo)", "partial_order(dependencies)",
                          "powl.copy()", "ModelGenerator provides the functions described below:"})
    EXPECT_TRUE(contains(u, lit)) << lit;
}

TEST(Prompt, LabelConstraintShuffledBySeed) {
  PromptConfig cfg;
  cfg.label_constraint = std::vector<std::string>{"Xray", "Yankee", "Zulu", "Alpha", "Bravo", "Charlie", "Delta"};
  cfg.seed = 7;
  const auto a = build_initial_prompt(kDescription, cfg)[1].content;
  const auto b = build_initial_prompt(kDescription, cfg)[1].content;
  EXPECT_EQ(a, b);
  const auto section = a.substr(a.find("Use exactly the following activity labels"));
  EXPECT_GT(section.size(), 0u);
  const auto expected = shuffled_labels(*cfg.label_constraint, 7);
  std::size_t at = 0;
  for (const auto& l : expected) {
    auto next = section.find("- " + l + "\n");
    ASSERT_NE(next, std::string::npos) << l;
    EXPECT_GE(next, at);
    at = next;
  }
  EXPECT_TRUE(std::is_permutation(expected.begin(), expected.end(), cfg.label_constraint->begin()));
  bool some_seed_differs = false;
  for (std::uint64_t s = 0; s < 20 && !some_seed_differs; ++s)
    some_seed_differs = shuffled_labels(*cfg.label_constraint, s) != expected;
  EXPECT_TRUE(some_seed_differs);
  EXPECT_GT(a.find("Use exactly"), a.find(kDescription));
}

TEST(Prompt, EmptyDescriptionRejected) {
  EXPECT_THROW(build_initial_prompt("  \n", {}), std::invalid_argument);
  EXPECT_THROW(make_message(Role::user, ""), std::invalid_argument);
}

TEST(Prompt, VerbatimAssets) {
  EXPECT_EQ(prompt_asset("criteria_general.txt"),
            "**Evaluation Criteria:**\n"
            "- **Behavior Accuracy:** How accurately does the model capture the intended process behavior?\n"
            "- **Completeness:** Does the model include all necessary activities as described?\n"
            "- **Correctness:** Are the control flows (e.g., partial orders, choices, loops) correctly implemented?\n");
  EXPECT_EQ(prompt_asset("criteria_conformance.txt"),
            "**Evaluation Criteria:**\n"
            "- **Fitness:** Evaluate how well the process model can reproduce the behaviors of the process according "
            "to the process description.\n"
            "- **Precision:** Evaluate the extent to which the process model exclusively represents behaviors that are "
            "allowed in the process according to the process description.\n");
  EXPECT_EQ(prompt_asset("output_optimization.txt"),
            "Could you further improve the model? Please critically evaluate the process model against the initial "
            "process description and improve it accordingly **only where genuinely beneficial**. If you see no "
            "significant areas for enhancement, it is perfectly acceptable to return the same model without any "
            "changes.\n");
  EXPECT_THROW(prompt_asset("nope.txt"), std::out_of_range);
}

TEST(Prompt, FewShotScriptCompilesToListedModel) {
  const auto& shot = prompt_asset("few_shot_bicycle.txt");
  auto code = dsl::extract_code(shot);
  ASSERT_FALSE(code.error);
  auto r = dsl::compile(code.script);
  ASSERT_TRUE(r.model);
  EXPECT_TRUE(structural_equal(r.model, oracle::bicycle_model()));
}

TEST(Generate, ValidFirstAttempt) {
  MockProvider mock({scripts::fenced(scripts::bicycle())});
  auto s = generate(kDescription, mock);
  EXPECT_EQ(s.status, SessionStatus::succeeded);
  EXPECT_EQ(s.iteration_count(), 1);
  EXPECT_FALSE(s.auto_fixed);
  ASSERT_TRUE(s.final_model);
  EXPECT_TRUE(structural_equal(s.final_model, oracle::bicycle_model()));
  EXPECT_EQ(s.conversation.size(), 3u);
  EXPECT_EQ(s.conversation.back().role, Role::assistant);
}

TEST(Generate, TwoCriticalThenValid) {
  MockProvider mock({scripts::fenced(scripts::kUnknownFunction), scripts::fenced(scripts::kUnknownFunction),
                     scripts::fenced(scripts::bicycle())});
  auto s = generate(kDescription, mock);
  EXPECT_EQ(s.status, SessionStatus::succeeded);
  EXPECT_EQ(s.iteration_count(), 3);
  EXPECT_EQ(error_prompts(s.conversation), 2u);
  EXPECT_TRUE(contains(s.conversation[3].content, "UNKNOWN_FUNCTION"));
  EXPECT_TRUE(contains(s.conversation[3].content, "gen.sequence(a)"));
  EXPECT_EQ(mock.calls(), 3u);
}

TEST(Generate, PersistentAdjustableAutofixedAtEleven) {
  MockProvider mock({scripts::fenced(scripts::kReuse)});
  auto s = generate(kDescription, mock);
  EXPECT_EQ(s.status, SessionStatus::succeeded_with_autofix);
  EXPECT_TRUE(s.auto_fixed);
  EXPECT_EQ(s.iteration_count(), 11);
  EXPECT_EQ(error_prompts(s.conversation), 10u);
  ASSERT_TRUE(s.final_model);
  EXPECT_TRUE(validate(s.final_model).is_valid());
  EXPECT_FALSE(validate(s.final_model).has(DiagCode::submodel_reuse));
  for (const auto& it : s.iterations) EXPECT_TRUE(ValidationReport(it.diagnostics).has(DiagCode::submodel_reuse));
}

TEST(Generate, PersistentCriticalFailsAtFifteen) {
  MockProvider mock({scripts::fenced(scripts::kParseError)});
  auto s = generate(kDescription, mock);
  EXPECT_EQ(s.status, SessionStatus::failed);
  EXPECT_EQ(s.iteration_count(), 15);
  EXPECT_FALSE(s.final_model);
  EXPECT_EQ(error_prompts(s.conversation), 14u);
  EXPECT_TRUE(contains(s.failure_reason, "PARSE_ERROR"));
}

TEST(Generate, MixedCriticalAndAdjustableCountsAsCritical) {
  const std::string mixed =
      "gen = ModelGenerator()\na = gen.activity('A')\nb = gen.activity('B')\nx = gen.xor(a, b)\n"
      "final_model = gen.partial_order(dependencies=[(a, x), (x, a)])";
  MockProvider mock({scripts::fenced(mixed)});
  auto s = generate(kDescription, mock);
  EXPECT_EQ(s.status, SessionStatus::failed);
  EXPECT_EQ(s.iteration_count(), 15);
}

TEST(Generate, AdjustableThenValidBeforeThreshold) {
  MockProvider mock({scripts::fenced(scripts::kReuse), scripts::fenced(scripts::kSequenceXY)});
  auto s = generate(kDescription, mock);
  EXPECT_EQ(s.status, SessionStatus::succeeded);
  EXPECT_EQ(s.iteration_count(), 2);
  EXPECT_TRUE(contains(s.conversation[3].content, "SUBMODEL_REUSE"));
}

TEST(Generate, EmptyResponseIsCritical) {
  MockProvider mock({"", scripts::fenced(scripts::kSequenceXY)});
  auto s = generate(kDescription, mock);
  EXPECT_EQ(s.iteration_count(), 2);
  EXPECT_TRUE(ValidationReport(s.iterations[0].diagnostics).has(DiagCode::empty_response));
}

TEST(Generate, CustomThresholds) {
  GenerationConfig cfg;
  cfg.adjustable_iteration_threshold = 2;
  cfg.total_iteration_limit = 4;
  MockProvider reuse({scripts::fenced(scripts::kReuse)});
  EXPECT_EQ(generate(kDescription, reuse, cfg).iteration_count(), 3);
  MockProvider broken({scripts::fenced(scripts::kCycle)});
  EXPECT_EQ(generate(kDescription, broken, cfg).iteration_count(), 4);
  cfg.total_iteration_limit = 1;
  EXPECT_THROW(generate(kDescription, broken, cfg), std::invalid_argument);
}

TEST(Generate, TransportFailureEndsSession) {
  MockProvider mock({"!transport_error"});
  auto s = generate(kDescription, mock);
  EXPECT_EQ(s.status, SessionStatus::failed);
  EXPECT_EQ(s.iteration_count(), 1);
  EXPECT_TRUE(ValidationReport(s.last_diagnostics()).has(DiagCode::transport_error));
  EXPECT_TRUE(contains(s.failure_reason, "transport"));
}

TEST(Generate, ReplayReproducesPrompts) {
  std::vector<std::string> script{scripts::fenced(scripts::kUnknownFunction), scripts::fenced(scripts::kReuse),
                                  scripts::fenced(scripts::bicycle())};
  GenerationConfig cfg;
  cfg.prompt.label_constraint = std::vector<std::string>{"A", "B", "C", "D"};
  cfg.prompt.seed = 42;
  MockProvider first(script), second(script);
  auto s1 = generate(kDescription, first, cfg);
  auto s2 = generate(kDescription, second, cfg);
  ASSERT_EQ(first.requests().size(), second.requests().size());
  for (std::size_t i = 0; i < first.requests().size(); ++i)
    EXPECT_EQ(joined(first.requests()[i]), joined(second.requests()[i]));
  EXPECT_EQ(s1.conversation, s2.conversation);
  // Requests are prefixes of the final conversation.
  for (const auto& req : first.requests()) {
    ASSERT_LE(req.size(), s1.conversation.size());
    EXPECT_TRUE(std::equal(req.begin(), req.end(), s1.conversation.begin()));
  }
}

TEST(Generate, ApiKeyNeverInPrompts) {
  ::setenv("POWLGEN_TEST_SECRET", "sk-very-secret-value", 1);
  MockProvider mock({scripts::fenced(scripts::kParseError), scripts::fenced(scripts::kSequenceXY)});
  auto s = generate(kDescription, mock);
  auto text = joined(s.conversation);
  for (const auto& r : mock.requests()) text += joined(r);
  EXPECT_FALSE(contains(text, "sk-very-secret-value"));
  ::unsetenv("POWLGEN_TEST_SECRET");
}

TEST(Generate, IterationAccountingProperty) {
  std::mt19937 rng(3);
  const std::vector<std::string> pool{scripts::fenced(scripts::kParseError), scripts::fenced(scripts::kReuse),
                                      scripts::fenced(scripts::kUnknownFunction), scripts::fenced(scripts::kCycle),
                                      scripts::fenced(scripts::kSequenceXY), ""};
  for (int round = 0; round < 60; ++round) {
    std::vector<std::string> script;
    const int n = 1 + static_cast<int>(rng() % 20);
    for (int i = 0; i < n; ++i) script.push_back(pool[rng() % pool.size()]);
    MockProvider mock(script);
    auto s = generate(kDescription, mock);
    EXPECT_GE(s.iteration_count(), 1);
    EXPECT_LE(s.iteration_count(), 15);
    EXPECT_EQ(s.succeeded(), s.final_model != nullptr);
    if (s.succeeded()) EXPECT_TRUE(validate(s.final_model).is_valid());
    if (s.status == SessionStatus::failed) EXPECT_EQ(s.iteration_count(), 15);
    if (s.auto_fixed) EXPECT_GT(s.iteration_count(), 10);
    EXPECT_EQ(static_cast<std::size_t>(s.iteration_count()), mock.calls());
  }
}

TEST(Refine, FeedbackMakesActivitySkippable) {
  MockProvider mock({scripts::fenced(scripts::kSequenceXY), scripts::fenced(scripts::kSkippableX)});
  auto s = generate(kDescription, mock);
  ASSERT_TRUE(s.succeeded());
  auto r = refine(s, "make activity X skippable", mock);
  EXPECT_EQ(r.status, SessionStatus::succeeded);
  EXPECT_EQ(r.round, 1);
  EXPECT_EQ(r.iteration_count(), 1);
  EXPECT_EQ(enumerate_variants(r.final_model).traces, (std::set<Trace>{{"X", "Y"}, {"Y"}}));
  EXPECT_TRUE(std::equal(s.conversation.begin(), s.conversation.end(), r.conversation.begin()));
  EXPECT_TRUE(contains(r.conversation[s.conversation.size()].content, "make activity X skippable"));
}

TEST(Refine, EmptyFeedbackRejectedBeforeProviderCall) {
  MockProvider mock({scripts::fenced(scripts::kSequenceXY)});
  auto s = generate(kDescription, mock);
  const auto before = mock.calls();
  EXPECT_THROW(refine(s, "  ", mock), std::invalid_argument);
  EXPECT_EQ(mock.calls(), before);
  MockProvider failing({scripts::fenced(scripts::kParseError)});
  auto f = generate(kDescription, failing);
  EXPECT_THROW(refine(f, "anything", failing), std::invalid_argument);
}

TEST(Refine, TwoRoundsKeepHistoryInOrder) {
  MockProvider mock({scripts::fenced(scripts::kSequenceXY), scripts::fenced(scripts::kSkippableX),
                     scripts::fenced(scripts::kParallelXY)});
  auto s = refine(refine(generate(kDescription, mock), "first feedback", mock), "second feedback", mock);
  EXPECT_EQ(s.round, 2);
  const auto text = joined(s.conversation);
  ASSERT_NE(text.find("first feedback"), std::string::npos);
  EXPECT_LT(text.find("first feedback"), text.find("second feedback"));
  EXPECT_EQ(s.iterations.size(), 3u);
  EXPECT_EQ(enumerate_variants(s.final_model).traces.size(), 2u);
}

TEST(Refine, FreshBudgetPerRound) {
  std::vector<std::string> script{scripts::fenced(scripts::kSequenceXY)};
  for (int i = 0; i < 14; ++i) script.push_back(scripts::fenced(scripts::kParseError));
  script.push_back(scripts::fenced(scripts::kSkippableX));
  MockProvider mock(script);
  auto r = refine(generate(kDescription, mock), "make X optional", mock);
  EXPECT_EQ(r.status, SessionStatus::succeeded);
  EXPECT_EQ(r.iteration_count(), 15);
}

TEST(SessionJson, RoundTrip) {
  MockProvider mock({scripts::fenced(scripts::kReuse), scripts::fenced(scripts::bicycle())});
  auto s = generate(kDescription, mock);
  auto back = session_from_json(session_to_json(s));
  EXPECT_EQ(session_to_json(back), session_to_json(s));
  EXPECT_TRUE(structural_equal(back.final_model, s.final_model));
  EXPECT_EQ(back.iteration_count(), 2);
}

TEST(SelfEval, ParseScores) {
  EXPECT_EQ(parse_scores("R1: 0.6\nR2: 0.9", 2), (std::vector<double>{0.6, 0.9}));
  EXPECT_EQ(parse_scores("After careful review of R1 and R2 I conclude:\n\n**R1:** 0.75 (good)\n- R2 = 1\nThat is all.", 2),
            (std::vector<double>{0.75, 1.0}));
  EXPECT_EQ(parse_scores("R2: .5\nR1: 0.25\nR1: 0.9", 2), (std::vector<double>{0.25, 0.5}));
  EXPECT_FALSE(parse_scores("R1: 0.6", 2));
  EXPECT_FALSE(parse_scores("R1: 1.5\nR2: 0.2", 2));
  EXPECT_FALSE(parse_scores("R1 is better than R2", 2));
  EXPECT_FALSE(parse_scores("", 1));
}

TEST(SelfEval, SelectArgmaxLowestIndexOnTie) {
  EXPECT_EQ(select_best({0.6, 0.9}), 1u);
  EXPECT_EQ(select_best({0.8, 0.8}), 0u);
  EXPECT_EQ(select_best({0.1, 0.7, 0.7, 0.2}), 1u);
  EXPECT_THROW(select_best({}), std::invalid_argument);
}

namespace {

std::vector<Candidate> candidates(int k) {
  const std::vector<std::string> srcs{scripts::kSequenceXY, scripts::kSkippableX, scripts::kParallelXY,
                                      scripts::bicycle()};
  std::vector<Candidate> out;
  for (int i = 0; i < k; ++i) {
    auto m = dsl::compile(dsl::Script{srcs[i % srcs.size()]}).model;
    out.push_back({m, dsl::render(m).source});
  }
  return out;
}

}  // namespace

TEST(SelfEval, PromptContents) {
  auto c = candidates(4);
  auto conv = self_eval_prompt(kDescription, c, Criteria::general);
  const auto& u = conv.back().content;
  EXPECT_TRUE(contains(u, kDescription));
  for (int i = 1; i <= 4; ++i) EXPECT_TRUE(contains(u, "\nR" + std::to_string(i) + ":\n```python\n"));
  EXPECT_TRUE(contains(u, prompt_asset("criteria_general.txt")));
  EXPECT_FALSE(contains(u, "**Fitness:**"));
  EXPECT_TRUE(contains(u, "R4: <score>"));
  EXPECT_LT(u.find("R1:\n"), u.find("R2:\n"));
  auto conf = self_eval_prompt(kDescription, c, Criteria::conformance).back().content;
  EXPECT_TRUE(contains(conf, prompt_asset("criteria_conformance.txt")));
}

TEST(SelfEval, SelectsFromReply) {
  MockProvider mock({"R1: 0.6\nR2: 0.9"});
  auto r = self_evaluate_select(kDescription, candidates(2), Criteria::general, mock);
  EXPECT_EQ(r.scores, (std::vector<double>{0.6, 0.9}));
  EXPECT_EQ(r.selected, 1u);
  EXPECT_EQ(r.calls, 1);
  MockProvider tie({"R1: 0.8\nR2: 0.8"});
  EXPECT_EQ(self_evaluate_select(kDescription, candidates(2), Criteria::conformance, tie).selected, 0u);
}

TEST(SelfEval, ReasksThenFails) {
  MockProvider late({"I like them all.", "Still prose.", "R1: 0.1\nR2: 0.3\nR3: 0.2"});
  auto r = self_evaluate_select(kDescription, candidates(3), Criteria::general, late);
  EXPECT_EQ(r.calls, 3);
  EXPECT_EQ(r.selected, 1u);
  auto reqs = late.requests();
  EXPECT_EQ(reqs[2].size(), reqs[0].size() + 4);

  MockProvider never({"no scores here"});
  EXPECT_THROW(self_evaluate_select(kDescription, candidates(2), Criteria::general, never), EvaluationError);
  EXPECT_EQ(never.calls(), 1u + kEvaluationReasks);
  try {
    MockProvider again({"nothing"});
    self_evaluate_select(kDescription, candidates(2), Criteria::general, again);
  } catch (const EvaluationError& e) {
    EXPECT_TRUE(contains(e.what(), "UNPARSEABLE_EVALUATION"));
  }
  MockProvider unused({"R1: 1"});
  EXPECT_THROW(self_evaluate_select(kDescription, candidates(1), Criteria::general, unused), std::invalid_argument);
  EXPECT_EQ(unused.calls(), 0u);
}

TEST(InputOptimization, EchoIsIdentity) {
  EchoProvider echo;
  EXPECT_EQ(optimize_input(kDescription, echo), kDescription);
}

TEST(InputOptimization, PromptText) {
  MockProvider mock({"  A richer description.\n"});
  EXPECT_EQ(optimize_input(kDescription, mock), "A richer description.");
  const auto req = joined(mock.requests().at(0));
  EXPECT_TRUE(contains(req, "**Detail Enhancement:**"));
  EXPECT_TRUE(contains(req, "there is an exclusive choice between performing X or skipping it"));
  EXPECT_TRUE(contains(req, "optimize this description to make it richer and more detailed"));
  EXPECT_TRUE(contains(req, kDescription));
  EXPECT_THROW(optimize_input("", mock), std::invalid_argument);
}

namespace {

GenerationSession succeeded_session(const std::string& script) {
  MockProvider mock({scripts::fenced(script)});
  auto s = generate(kDescription, mock);
  EXPECT_TRUE(s.succeeded());
  return s;
}

}  // namespace

TEST(OutputOptimization, UnchangedModelAccepted) {
  auto s = succeeded_session(scripts::bicycle());
  MockProvider mock({scripts::fenced(scripts::bicycle())});
  auto r = optimize_output(s, mock);
  EXPECT_TRUE(r.optimized);
  EXPECT_TRUE(r.unchanged);
  EXPECT_EQ(r.sends, 1);
  EXPECT_TRUE(structural_equal(r.session.final_model, s.final_model));
  EXPECT_TRUE(contains(r.session.conversation[r.session.conversation.size() - 2].content, "only where genuinely beneficial"));
}

TEST(OutputOptimization, IdenticalPromptResentOnError) {
  auto s = succeeded_session(scripts::kSequenceXY);
  MockProvider mock({scripts::fenced(scripts::kParseError), scripts::fenced(scripts::kCycle),
                     scripts::fenced(scripts::kSkippableX)});
  auto r = optimize_output(s, mock);
  EXPECT_TRUE(r.optimized);
  EXPECT_FALSE(r.unchanged);
  EXPECT_EQ(r.sends, 3);
  const auto reqs = mock.requests();
  ASSERT_EQ(reqs.size(), 3u);
  EXPECT_EQ(joined(reqs[0]), joined(reqs[1]));
  EXPECT_EQ(joined(reqs[1]), joined(reqs[2]));
  EXPECT_EQ(reqs[0].back().content, prompt_asset("output_optimization.txt"));
  EXPECT_EQ(error_prompts(reqs[2]), 0u);
  EXPECT_EQ(enumerate_variants(r.session.final_model).traces, (std::set<Trace>{{"X", "Y"}, {"Y"}}));
}

TEST(OutputOptimization, ExhaustionKeepsOriginal) {
  auto s = succeeded_session(scripts::kSequenceXY);
  MockProvider mock({scripts::fenced(scripts::kParseError)});
  auto r = optimize_output(s, mock);
  EXPECT_FALSE(r.optimized);
  EXPECT_EQ(r.sends, 5);
  EXPECT_EQ(mock.calls(), 5u);
  EXPECT_TRUE(contains(r.error, "OPTIMIZATION_FAILED"));
  EXPECT_TRUE(structural_equal(r.session.final_model, s.final_model));
  EXPECT_EQ(r.session.conversation, s.conversation);
  MockProvider three({scripts::fenced(scripts::kParseError)});
  EXPECT_EQ(optimize_output(s, three, 3).sends, 3);
}

TEST(OutputOptimization, AdjustableReplyIsAutofixed) {
  auto s = succeeded_session(scripts::kSequenceXY);
  MockProvider mock({scripts::fenced(scripts::kReuse)});
  auto r = optimize_output(s, mock);
  EXPECT_TRUE(r.optimized);
  EXPECT_EQ(r.sends, 1);
  EXPECT_FALSE(validate(r.session.final_model).has(DiagCode::submodel_reuse));
}

TEST(ProviderConfig, JsonParsing) {
  auto c = provider_config_from_json(nlohmann::json::parse(
      R"({"name":"gpt","kind":"openai","model":"m","api_key_env":"OPENAI_API_KEY","timeout_seconds":30})"));
  EXPECT_EQ(c.kind, ProviderKind::openai);
  EXPECT_EQ(c.api_key_env, "OPENAI_API_KEY");
  EXPECT_EQ(provider_config_from_json(provider_config_to_json(c)).name, "gpt");
  EXPECT_THROW(provider_config_from_json(nlohmann::json::parse(R"({"kind":"openai","timeout_seconds":0})")),
               std::invalid_argument);
  EXPECT_THROW(provider_config_from_json(nlohmann::json::parse(R"({"kind":"openai","api_key":"x"})")),
               std::invalid_argument);
  EXPECT_THROW(provider_config_from_json(nlohmann::json::parse(R"({"kind":"mock"})")), std::invalid_argument);
  EXPECT_THROW(provider_config_from_json(nlohmann::json::parse(R"({"kind":"nope"})")), std::invalid_argument);
  auto m = provider_config_from_json(nlohmann::json::parse(R"({"kind":"mock","script":["a","b"]})"));
  auto p = make_provider(m);
  EXPECT_EQ(p->complete({}), "a");
  EXPECT_EQ(p->complete({}), "b");
  EXPECT_EQ(p->complete({}), "b");
}

TEST(HttpProvider, VendorShaping) {
  Conversation conv{{Role::system, "sys"}, {Role::user, "hello"}, {Role::assistant, "hi"}, {Role::user, "again"}};
  ProviderConfig c;
  c.model = "m";
  c.kind = ProviderKind::openai;
  auto o = HttpProvider(c).request_body(conv);
  EXPECT_EQ(o["messages"].size(), 4u);
  EXPECT_EQ(o["messages"][0]["role"], "system");
  EXPECT_EQ(HttpProvider(c).parse_response(nlohmann::json::parse(R"({"choices":[{"message":{"content":"x"}}]})")), "x");
  c.kind = ProviderKind::anthropic;
  auto a = HttpProvider(c).request_body(conv);
  EXPECT_EQ(a["system"], "sys");
  EXPECT_EQ(a["messages"].size(), 3u);
  EXPECT_EQ(HttpProvider(c).parse_response(
                nlohmann::json::parse(R"({"content":[{"type":"text","text":"a"},{"type":"text","text":"b"}]})")),
            "ab");
  c.kind = ProviderKind::google;
  auto g = HttpProvider(c).request_body(conv);
  EXPECT_EQ(g["contents"].size(), 3u);
  EXPECT_EQ(g["contents"][1]["role"], "model");
  EXPECT_EQ(g["systemInstruction"]["parts"][0]["text"], "sys");
  EXPECT_THROW(HttpProvider(c).parse_response(nlohmann::json::parse("{}")), TransportError);
}

TEST(HttpProvider, LocalServerWithRetries) {
  httplib::Server server;
  std::atomic<int> hits{0};
  std::string auth;
  server.Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
    if (++hits == 1) {
      res.status = 503;
      return;
    }
    auth = req.get_header_value("Authorization");
    auto body = nlohmann::json::parse(req.body);
    res.set_content(nlohmann::json{{"choices", {{{"message", {{"content", body["messages"].back()["content"]}}}}}}}.dump(),
                    "application/json");
  });
  const int port = server.bind_to_any_port("127.0.0.1");
  std::thread th([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  ::setenv("POWLGEN_TEST_KEY", "k123", 1);
  ProviderConfig c;
  c.kind = ProviderKind::openai;
  c.endpoint = "http://127.0.0.1:" + std::to_string(port) + "/v1/chat/completions";
  c.model = "m";
  c.api_key_env = "POWLGEN_TEST_KEY";
  c.timeout_seconds = 5;
  c.max_retries = 1;
  HttpProvider p(c);
  EXPECT_EQ(p.complete({{Role::user, "ping"}}), "ping");
  EXPECT_EQ(hits.load(), 2);
  EXPECT_EQ(auth, "Bearer k123");

  c.api_key_env = "POWLGEN_TEST_MISSING_KEY";
  EXPECT_THROW(HttpProvider(c).complete({{Role::user, "ping"}}), TransportError);
  c.api_key_env.clear();
  c.endpoint = "http://127.0.0.1:" + std::to_string(port) + "/missing";
  EXPECT_THROW(HttpProvider(c).complete({{Role::user, "ping"}}), TransportError);
  server.stop();
  th.join();
  ::unsetenv("POWLGEN_TEST_KEY");
}
