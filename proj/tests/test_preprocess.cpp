#include <gtest/gtest.h>

#include "faqforge/preprocess.hpp"

using namespace faqforge;

namespace {
const TextResources &resources() {
  static const TextResources r = TextResources::load_default();
  return r;
}
using Tokens = std::vector<std::string>;
} // namespace

TEST(Tokenize, LowercasesAndStripsEdgePunctuation) {
  EXPECT_EQ(tokenize("How do I split, Gmail's threads?"),
            (Tokens{"how", "do", "i", "split", "gmail's", "threads"}));
  EXPECT_EQ(tokenize("  \t\n"), Tokens{});
  EXPECT_EQ(tokenize("... ?!"), Tokens{});
}

TEST(Tokenize, HandlesUnicodeSpaceAndPunctuation) {
  EXPECT_EQ(tokenize("«dropbox» security…"), (Tokens{"dropbox", "security"}));
  EXPECT_EQ(tokenize("café naïve"), (Tokens{"café", "naïve"}));
}

TEST(Preprocess, DropboxQuestion) {
  EXPECT_EQ(preprocess("How secure is my sensitive data on dropbox", resources()).tokens,
            (Tokens{"secure", "sensitive", "data", "dropbox"}));
}

TEST(Preprocess, LemmatizesInflections) {
  EXPECT_EQ(preprocess("Splitting conversations in gmail", resources()).tokens,
            (Tokens{"split", "conversation", "gmail"}));
  EXPECT_EQ(preprocess("How do I split two merged gmail conversations", resources()).tokens,
            (Tokens{"split", "two", "merge", "gmail", "conversation"}));
  EXPECT_EQ(preprocess("Does dropbox have good security against attackers", resources()).tokens,
            (Tokens{"dropbox", "good", "security", "attacker"}));
}

TEST(Preprocess, StopwordOnlyTextIsEmpty) {
  EXPECT_TRUE(preprocess("how do I do it?", resources()).empty());
}

TEST(Preprocess, LemmasAreFixedPoints) {
  for (const char *w : {"splitting", "conversations", "threats", "photos", "showed", "merged"}) {
    const std::string once = resources().lemma(w);
    EXPECT_EQ(resources().lemma(once), once) << w;
  }
}

TEST(Preprocess, ChainedLexiconEntriesResolve) {
  TextResources r({"the"}, {{"a", "b"}, {"b", "c"}});
  EXPECT_EQ(r.lemma("a"), "c");
  EXPECT_EQ(r.lemma("z"), "z");
}

TEST(Preprocess, IsIdempotentOnItsOutput) {
  const auto once = preprocess("Are there security threats to dropbox", resources());
  EXPECT_EQ(preprocess(join_tokens(once.tokens), resources()).tokens, once.tokens);
}
