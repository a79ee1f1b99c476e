// Copyright 2026 The LLMClean Authors
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

#include <gtest/gtest.h>

#include "llmclean/error.hpp"
#include "llmclean/rule.hpp"
#include "llmclean/util.hpp"
#include "random_rules.hpp"

namespace llmclean {
namespace {

Predicate pred(PredicateOp op, Operand l, Operand r, std::optional<double> t = std::nullopt) {
  return Predicate{op, std::move(l), std::move(r), t};
}

ColumnRef col(std::string a, std::string c) { return ColumnRef{std::move(a), std::move(c)}; }

TEST(ParseRule, UnaryMissingValueRule) {
  OfdRule r = parse_rule("t1&EQ(t1.System,\"\")", DependencyKind::Denial);
  EXPECT_EQ(r.aliases, std::vector<std::string>{"t1"});
  ASSERT_EQ(r.predicates.size(), 1u);
  EXPECT_EQ(r.predicates[0], pred(PredicateOp::EQ, col("t1", "System"), Literal{""}));
  EXPECT_EQ(render_rule(r), "t1&EQ(t1.System,\"\")");
}

TEST(ParseRule, BinaryFdShape) {
  OfdRule r = parse_rule("t1&t2&EQ(t1.SensingDevice,t2.SensingDevice)&IQ(t1.Device,t2.Device)",
                         DependencyKind::Denial);
  EXPECT_EQ(r.aliases, (std::vector<std::string>{"t1", "t2"}));
  ASSERT_EQ(r.predicates.size(), 2u);
  EXPECT_EQ(r.predicates[0], pred(PredicateOp::EQ, col("t1", "SensingDevice"), col("t2", "SensingDevice")));
  EXPECT_EQ(r.predicates[1], pred(PredicateOp::IQ, col("t1", "Device"), col("t2", "Device")));
}

TEST(ParseRule, MatchingThresholds) {
  OfdRule r = parse_rule("t1&t2&SIM75(t1.ProviderNumber,t2.ProviderNumber)&SIM75(t1.PhoneNumber,t2.PhoneNumber)",
                         DependencyKind::Matching);
  ASSERT_EQ(r.predicates.size(), 2u);
  for (const auto& p : r.predicates) {
    EXPECT_EQ(p.op, PredicateOp::SIM);
    EXPECT_DOUBLE_EQ(*p.sim_threshold, 0.75);
  }
  OfdRule bare = parse_rule("t1&t2&SIM(t1.A,t2.A)", DependencyKind::Matching);
  EXPECT_DOUBLE_EQ(*bare.predicates[0].sim_threshold, kDefaultSimThreshold);
  EXPECT_EQ(render_rule(bare), "t1&t2&SIM75(t1.A,t2.A)");
  EXPECT_DOUBLE_EQ(*parse_rule("t1&t2&SIM100(t1.A,t2.A)", DependencyKind::Matching).predicates[0].sim_threshold, 1.0);
  EXPECT_DOUBLE_EQ(*parse_rule("t1&t2&SIM0(t1.A,t2.A)", DependencyKind::Matching).predicates[0].sim_threshold, 0.0);
}

TEST(ParseRule, ErrorsCarryOffsets) {
  auto offset_of = [](std::string_view text) -> std::size_t {
    try {
      parse_rule(text, DependencyKind::Denial);
    } catch (const ParseError& e) {
      return e.offset();
    }
    ADD_FAILURE() << "no ParseError for " << text;
    return 0;
  };
  EXPECT_EQ(offset_of("t1&EQ(t3.X,\"\")"), 6u);  // undeclared alias
  EXPECT_EQ(offset_of("t1&EQ(t1.X,\"\""), 13u);  // missing ')'
  EXPECT_EQ(offset_of("t1&LT(t1.X,\"\")"), 3u);  // unknown operator
  EXPECT_EQ(offset_of("t1&EQ(t1.X,\"abc)"), 11u);  // unterminated literal
  EXPECT_EQ(offset_of("t1"), 2u);  // no predicates
  EXPECT_THROW(parse_rule("", DependencyKind::Denial), ParseError);
  EXPECT_THROW(parse_rule("t1&t2&EQ(t1.A,\"x\")", DependencyKind::Denial), ParseError);  // unused t2
  EXPECT_THROW(parse_rule("t1&t2&t3&EQ(t1.A,t2.A)", DependencyKind::Denial), ParseError);
  EXPECT_THROW(parse_rule("t1&t2&SIM101(t1.A,t2.A)", DependencyKind::Matching), ParseError);
  EXPECT_THROW(parse_rule("t1&EQ(t1.A,\"\\n\")", DependencyKind::Denial), ParseError);
}

TEST(RenderRule, EscapesQuotesAndBackslashes) {
  OfdRule r;
  r.aliases = {"t1"};
  r.predicates.push_back(pred(PredicateOp::EQ, col("t1", "Name"), Literal{"say \"hi\" \\ bye"}));
  const std::string text = render_rule(r);
  EXPECT_EQ(text, "t1&EQ(t1.Name,\"say \\\"hi\\\" \\\\ bye\")");
  EXPECT_EQ(parse_rule(text, DependencyKind::Denial), r);
}

TEST(RenderRule, RoundTripsExamples) {
  for (const char* text : {"t1&EQ(t1.System,\"\")",
                           "t1&t2&EQ(t1.SensingDevice,t2.SensingDevice)&IQ(t1.Device,t2.Device)",
                           "t1&t2&SIM75(t1.ProviderNumber,t2.ProviderNumber)&SIM75(t1.PhoneNumber,t2.PhoneNumber)",
                           "t1&t2&EQ(t1.device,\"device_in_1\")&EQ(t2.device,\"device_main\")"}) {
    OfdRule r = parse_rule(text, DependencyKind::Denial);
    EXPECT_EQ(render_rule(r), text);
    EXPECT_EQ(parse_rule(render_rule(r), DependencyKind::Denial), r);
  }
}

TEST(ParseRule, ToleratesWhitespaceAroundTokens) {
  OfdRule r = parse_rule(" t1 & t2 & EQ( t1.Zip Code , t2.Zip Code ) & IQ(t1.City,t2.City) ", DependencyKind::Denial);
  EXPECT_EQ(render_rule(r), "t1&t2&EQ(t1.Zip Code,t2.Zip Code)&IQ(t1.City,t2.City)");
}

TEST(ValidateRule, RejectsBrokenStructures) {
  OfdRule r;
  r.aliases = {"t1"};
  EXPECT_THROW(validate_rule(r), ParseError);
  r.predicates.push_back(pred(PredicateOp::EQ, col("t2", "A"), Literal{""}));
  EXPECT_THROW(validate_rule(r), ParseError);
  r.predicates[0] = pred(PredicateOp::SIM, col("t1", "A"), col("t1", "A"), 0.755);
  EXPECT_THROW(validate_rule(r), ParseError);
  r.predicates[0] = pred(PredicateOp::EQ, col("t1", "A,B"), Literal{""});
  EXPECT_THROW(validate_rule(r), ParseError);
  r.predicates[0] = pred(PredicateOp::EQ, col("t1", "A"), Literal{""});
  EXPECT_NO_THROW(validate_rule(r));
}

TEST(RoundTripProperty, ParseRenderIdentity) {
  Rng rng(2024);
  for (int i = 0; i < 5000; ++i) {
    const OfdRule r = fixtures::random_rule(rng);
    ASSERT_NO_THROW(validate_rule(r));
    const std::string text = render_rule(r);
    OfdRule back = parse_rule(text, r.kind);
    ASSERT_EQ(back, r) << text;
    ASSERT_EQ(render_rule(back), text);
  }
}

TEST(Fuzz, RandomInputNeverCrashes) {
  Rng rng(99);
  const std::string alphabet = "t12&EQIQSIM75(),.\"\\ abcXYZ\n";
  for (int i = 0; i < 10000; ++i) {
    std::string s;
    const std::size_t len = rng.below(40);
    for (std::size_t k = 0; k < len; ++k) s.push_back(alphabet[rng.below(alphabet.size())]);
    try {
      OfdRule r = parse_rule(s, DependencyKind::Denial);
      ASSERT_EQ(parse_rule(render_rule(r), DependencyKind::Denial), r);
    } catch (const ParseError& e) {
      ASSERT_LE(e.offset(), s.size());
    }
  }
}

TEST(RuleFile, ParsesIdsCommentsAndKinds) {
  RuleFile f = parse_rule_file(
      "# comment\n"
      "\n"
      "denial: t1&EQ(t1.System,\"\")\n"
      "device_link[dl:ds18b20_1]: t1&t2&EQ(t1.sensor,\"ds18b20_1\")&EQ(t1.sensor,t2.sensor)&IQ(t1.device,t2.device)\n"
      "denial: t1&EQ(t1.Device,\"\")\n");
  ASSERT_EQ(f.rules.size(), 3u);
  EXPECT_EQ(f.rules[0].id, "denial_1");
  EXPECT_EQ(f.rules[1].id, "dl:ds18b20_1");
  EXPECT_EQ(f.rules[1].kind, DependencyKind::DeviceLink);
  EXPECT_EQ(f.rules[2].id, "denial_3");  // numbered by position in the file
  RuleFile back = parse_rule_file(render_rule_file(f.rules));
  EXPECT_EQ(back.rules, f.rules);
}

TEST(RuleFile, StrictAndLenientModes) {
  const std::string text = "denial: t1&EQ(t1.A,\"\")\nbogus: t1&EQ(t1.A,\"\")\ndenial: t1&EQ(t9.A,\"\")\ndenial: t1&EQ(t1.B,\"\")\n";
  try {
    parse_rule_file(text);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.offset(), 2u);
  }
  RuleFile lenient = parse_rule_file(text, false);
  EXPECT_EQ(lenient.rules.size(), 2u);
  ASSERT_EQ(lenient.errors.size(), 2u);
  EXPECT_EQ(lenient.errors[0].line, 2u);
  EXPECT_EQ(lenient.errors[1].line, 3u);
  EXPECT_THROW(parse_rule_file("denial[x]: t1&EQ(t1.A,\"\")\ndenial[x]: t1&EQ(t1.B,\"\")\n"), ParseError);
}

TEST(KindNames, RoundTrip) {
  for (int i = 0; i < 7; ++i) {
    auto k = static_cast<DependencyKind>(i);
    EXPECT_EQ(kind_from_name(kind_name(k)), k);
  }
  EXPECT_EQ(kind_name(DependencyKind::DeviceLink), "device_link");
  EXPECT_FALSE(kind_from_name("Denial"));
}

TEST(ParseCount, CountsInvocations) {
  const auto before = rule_parse_count();
  parse_rule("t1&EQ(t1.A,\"\")", DependencyKind::Denial);
  EXPECT_THROW(parse_rule("x", DependencyKind::Denial), ParseError);
  EXPECT_EQ(rule_parse_count(), before + 2);
}

}  // namespace
}  // namespace llmclean
