// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include "sopagent/text.hpp"

using namespace sopagent;

TEST(Text, CollapseAndTrim) {
    EXPECT_EQ(text::collapse_whitespace("  a \t b\n\nc  "), "a b c");
    EXPECT_EQ(text::trim("\t x \n"), "x");
}

TEST(Text, Words) {
    EXPECT_EQ(text::words("listing_id on-hold, Seller@mail.com!"),
              (std::vector<std::string>{"listing", "id", "on-hold", "seller@mail.com"}));
}

TEST(Text, NormalizeLoose) {
    EXPECT_EQ(text::normalize_loose("How to find my Listing ID?"), "how to find my listing id");
}

TEST(Text, EditDistance) {
    EXPECT_EQ(text::edit_distance("lisint", "listing"), 2U);
    EXPECT_EQ(text::edit_distance("", "abc"), 3U);
    EXPECT_EQ(text::edit_distance("same", "same"), 0U);
}

TEST(Text, ReplaceAllAndLines) {
    EXPECT_EQ(text::replace_all("a-b-c", "-", "+"), "a+b+c");
    EXPECT_EQ(text::split_lines("a\r\nb\nc"), (std::vector<std::string>{"a", "b", "c"}));
    EXPECT_TRUE(text::contains_ci("Hello World", "WORLD"));
    EXPECT_TRUE(text::starts_with_ci("If x", "if"));
}
