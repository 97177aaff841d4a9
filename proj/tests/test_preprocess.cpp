#include <gtest/gtest.h>

#include "test_util.hpp"
#include "tscope/preprocess.hpp"

using namespace tscope;

TEST(SplitSentences, TwoTerminatedClauses) {
  EXPECT_EQ(split_sentences("Test A. Test B."), (std::vector<std::string>{"Test A.", "Test B."}));
}

TEST(SplitSentences, NoTerminator) {
  EXPECT_EQ(split_sentences("Test the browser"), (std::vector<std::string>{"Test the browser"}));
}

TEST(SplitSentences, SemicolonBoundary) {
  EXPECT_EQ(split_sentences("a; b"), (std::vector<std::string>{"a;", "b"}));
}

TEST(SplitSentences, TerminatorInsideTokenIsNotABoundary) {
  EXPECT_EQ(split_sentences("Open v1.2 now. Done"), (std::vector<std::string>{"Open v1.2 now.", "Done"}));
}

TEST(SplitSentences, WhitespaceOnlyWarns) {
  testutil::WarningCapture w;
  EXPECT_TRUE(split_sentences(" \t\n ").empty());
  EXPECT_EQ(w.messages.size(), 1u);
}

TEST(SplitSentences, CoversInput) {
  const std::string text = "First one!  Second? third;fourth. Last";
  std::string joined;
  for (const auto& s : split_sentences(text)) joined += s;
  std::string stripped;
  for (char c : text)
    if (!std::isspace(static_cast<unsigned char>(c))) stripped += c;
  std::string joined_stripped;
  for (char c : joined)
    if (!std::isspace(static_cast<unsigned char>(c))) joined_stripped += c;
  EXPECT_EQ(joined_stripped, stripped);
}

TEST(NormalizeTokens, LowercasesAndStripsPunctuation) {
  EXPECT_EQ(normalize_tokens("Browse the Visit History!"), (Tokens{"browse", "the", "visit", "history"}));
}

TEST(NormalizeTokens, KeepsInnerHyphen) {
  EXPECT_EQ(normalize_tokens("mesa-util tool"), (Tokens{"mesa-util", "tool"}));
  EXPECT_EQ(normalize_tokens("-lead trail- a--b"), (Tokens{"lead", "trail", "a", "b"}));
}

TEST(NormalizeTokens, CollapsesWhitespaceAndCasefolds) {
  EXPECT_EQ(normalize_tokens("3D  graphics"), (Tokens{"3d", "graphics"}));
}

TEST(NormalizeTokens, Idempotent) {
  for (const char* s : {"Browse the Visit History!", "mesa-util tool, (x/y) 3D", "When no   preset apps; are here"}) {
    const Tokens once = normalize_tokens(s);
    EXPECT_EQ(normalize_tokens(join(once)), once) << s;
    for (const auto& t : once) EXPECT_EQ(normalize_tokens(t), Tokens{t});
  }
}

TEST(AssembleSequence, SepBetweenSentences) {
  const auto tc = assemble_sequence("Open the file. Close it.");
  ASSERT_EQ(tc.sentences.size(), 2u);
  EXPECT_EQ(tc.sentences[0].size(), 3u);
  EXPECT_EQ(tc.sentences[1].size(), 2u);
  EXPECT_EQ(tc.sep_sequence.size(), 6u);
  EXPECT_EQ(tc.sep_sequence[3], kSep);
}

TEST(AssembleSequence, SingleSentenceHasNoSep) {
  const auto tc = assemble_sequence("Test the browser");
  EXPECT_EQ(std::count(tc.sep_sequence.begin(), tc.sep_sequence.end(), kSep), 0);
}

TEST(AssembleSequence, PunctuationOnlyIsAnError) { EXPECT_THROW(assemble_sequence("!!!"), PreprocessError); }

TEST(AssembleSequence, SepCountAndNoEmptySentences) {
  for (const char* s : {"A. B. C.", "One; two! three? four", "x. !!! . y"}) {
    const auto tc = assemble_sequence(s);
    EXPECT_EQ(static_cast<std::size_t>(std::count(tc.sep_sequence.begin(), tc.sep_sequence.end(), kSep)),
              tc.sentences.size() - 1);
    for (const auto& sent : tc.sentences) {
      EXPECT_FALSE(sent.empty());
      for (const auto& t : sent) EXPECT_EQ(t.find_first_of(" \t\n"), std::string::npos);
    }
  }
}
