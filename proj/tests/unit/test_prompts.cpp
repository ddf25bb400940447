#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "support/test_paths.hpp"
#include "uiprobe/errors.hpp"
#include "uiprobe/prompts.hpp"

using namespace uiprobe;

namespace {

// Golden bodies were extracted from the published figures by a separate
// LaTeX-to-text converter, not from this library.
std::string golden(TemplateId id) {
  std::ifstream in(uiprobe::testing::test_data_dir() / "golden" / "prompts" / (std::string(to_string(id)) + ".txt"),
                   std::ios::binary);
  EXPECT_TRUE(in) << to_string(id);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void replace_once(std::string& text, const std::string& from, const std::string& to) {
  size_t pos = text.find(from);
  ASSERT_NE(pos, std::string::npos) << from;
  text.replace(pos, from.size(), to);
}

}  // namespace

TEST(Prompts, BodiesMatchGoldenExtraction) {
  for (TemplateId id : all_templates()) {
    EXPECT_EQ(std::string(prompt_template(id).body), golden(id)) << to_string(id);
  }
}

TEST(Prompts, RenderedTemplatesDifferFromGoldenOnlyInSlots) {
  struct Case {
    TemplateId id;
    PromptContext context;
    std::vector<std::pair<std::string, std::string>> edits;
  };
  std::vector<Case> cases = {
      {TemplateId::ActionGen,
       {{"history_info_prompt", "None"}, {"domtree", "body\n  [id=0] button \"Go\""}},
       {{"{history_info_prompt}", "None"}, {"{domtree}", "body\n  [id=0] button \"Go\""}}},
      {TemplateId::Verification,
       {{"interact_element_names", "Edit button"}},
       {{"<interact_element_names>", "Edit button"}}},
      {TemplateId::ValidateSelect,
       {{"tasks", "['Search']"}, {"domtree", "D"}},
       {{"{str(tasks)}", "['Search']"}, {"{domtree}", "D"}}},
      {TemplateId::ValidateProcess,
       {{"task_text", "Search"}, {"domtree", "D2"}},
       {{"{task_text}", "Search"}, {"{domtree}", "D2"}}},
      {TemplateId::ValidateJudge, {{"task_text", "Delete - Confirm Delete"}}, {{"{task_text}", "Delete - Confirm Delete"}}},
  };
  for (const auto& c : cases) {
    std::string expected = golden(c.id);
    for (const auto& [from, to] : c.edits) replace_once(expected, from, to);
    EXPECT_EQ(render_prompt(c.id, c.context), expected) << to_string(c.id);
  }
}

TEST(Prompts, SpecExamples) {
  std::string a = render_prompt(TemplateId::ActionGen, {{"history_info_prompt", ""}, {"domtree", "body"}});
  EXPECT_NE(a.find("Page Information:"), std::string::npos);
  std::string v = render_prompt(TemplateId::Verification, {{"interact_element_names", "Edit button"}});
  EXPECT_NE(v.find("Interactive Action / Component Name"), std::string::npos);
  EXPECT_NE(v.find("Edit button"), std::string::npos);
  try {
    render_prompt(TemplateId::ActionGen, {{"history_info_prompt", ""}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::MissingSlot);
  }
}

TEST(Prompts, NoPlaceholderSurvivesAndFillsAreNotRescanned) {
  for (TemplateId id : all_templates()) {
    PromptContext ctx;
    for (const auto& s : prompt_template(id).slots) ctx[std::string(s.key)] = "{domtree}";
    std::string out = render_prompt(id, ctx);
    for (const auto& s : prompt_template(id).slots) {
      if (s.placeholder != "{domtree}") {
        EXPECT_EQ(out.find(s.placeholder), std::string::npos) << to_string(id);
      }
    }
    EXPECT_EQ(render_prompt(id, ctx), out);  // byte-stable
  }
}

TEST(Prompts, NamesRoundTrip) {
  for (TemplateId id : all_templates()) EXPECT_EQ(template_from_string(to_string(id)), id);
  EXPECT_THROW(template_from_string("nope"), Error);
}

TEST(Prompts, PythonListRepr) {
  // expected strings produced by Python's str() on the same list
  EXPECT_EQ(python_list_repr({"Search", "Delete - Confirm Delete", "it's", "say \"hi\" it's", "a\\b"}),
            R"(['Search', 'Delete - Confirm Delete', "it's", 'say "hi" it\'s', 'a\\b'])");
  EXPECT_EQ(python_list_repr({}), "[]");
}
