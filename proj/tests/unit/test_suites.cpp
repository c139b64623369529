#include <doctest.h>

#include "suites.hpp"

namespace {

void expect_all(const std::vector<suites::Check>& checks) {
    REQUIRE_FALSE(checks.empty());
    for (const auto& c : checks) {
        INFO(c.name, ": ", c.detail);
        CHECK(c.pass);
    }
}

}  // namespace

TEST_SUITE("suites") {

TEST_CASE("gradient checks, one seed") {
    expect_all(suites::gradient_checks(0));
}

TEST_CASE("oracle checks") {
    expect_all(suites::oracle_checks());
}

TEST_CASE("structural checks") {
    expect_all(suites::structural_checks());
}

}  // TEST_SUITE
