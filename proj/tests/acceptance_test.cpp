#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <iostream>

#include "poolsim/acceptance.hpp"

// Runs every acceptance criterion at its pinned tolerance and prints one
// pass/fail line per criterion.
TEST_CASE("acceptance criteria") {
    auto results = poolsim::acceptance::run_all(std::cout);
    REQUIRE(results.size() == poolsim::acceptance::kCriteria);
    for (const auto& r : results) {
        INFO("criterion ", r.id, ": ", r.name, " — ", r.detail);
        CHECK(r.pass);
    }
}
