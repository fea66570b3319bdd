#include <doctest.h>

#include "lorma/rng.hpp"

using namespace lorma;

TEST_CASE("rng: identical seeds give identical streams") {
    Rng a(123456), b(123456);
    for (int i = 0; i < 1000; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("rng: different seeds diverge") {
    Rng a(1), b(2);
    int equal = 0;
    for (int i = 0; i < 64; ++i) equal += (a.next_u64() == b.next_u64());
    CHECK(equal == 0);
}

TEST_CASE("rng: uniform range") {
    Rng rng(9);
    for (int i = 0; i < 10000; ++i) {
        const double u = rng.uniform();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
    }
}

TEST_CASE("rng: a gaussian draw consumes exactly two uniforms") {
    Rng a(77), b(77);
    (void)a.gaussian();
    b.next_u64();
    b.next_u64();
    // After skipping two raw draws, both streams must coincide again.
    for (int i = 0; i < 16; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("rng: below is in range and deterministic") {
    Rng a(5), b(5);
    for (int i = 0; i < 1000; ++i) {
        const std::uint64_t x = a.below(17);
        CHECK(x < 17);
        CHECK(x == b.below(17));
    }
}

TEST_CASE("rng: gaussian moments are sane") {
    Rng rng(4242);
    double sum = 0.0, sum_sq = 0.0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
        const double g = rng.gaussian();
        sum += g;
        sum_sq += g * g;
    }
    CHECK(std::abs(sum / n) < 0.03);
    CHECK(std::abs(sum_sq / n - 1.0) < 0.05);
}
