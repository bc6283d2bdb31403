#include "doctest.h"
#include "riesz/philox.hpp"

#include <cmath>

using namespace riesz;

// Known-answer vectors generated with numpy.random.Philox (Philox4x64-10).
// numpy increments the counter before producing a block, so its stream for
// counter c starts at block(c+1).
TEST_CASE("philox4x64 known answers") {
    auto b = philox::block({1, 0, 0, 0}, {0, 0});
    CHECK(b[0] == 0x02f4ba6408e4d89bULL);
    CHECK(b[1] == 0x3dd62b0b9ca8c5b2ULL);
    CHECK(b[2] == 0x1c8667a55d902e79ULL);
    CHECK(b[3] == 0x907d7a052fd5b4dcULL);

    b = philox::block({2, 0, 0, 0}, {0, 0});
    CHECK(b[0] == 0x809bf322883987c3ULL);
    CHECK(b[1] == 0x471128b9e807f7ddULL);
    CHECK(b[2] == 0xf250ba0dbec065b7ULL);
    CHECK(b[3] == 0xfc6ed66767a457bcULL);

    b = philox::block({2, 2, 3, 4}, {5, 6});
    CHECK(b[0] == 0x92ab6a0e75619263ULL);
    CHECK(b[1] == 0xd8ff75bdc6bf8f60ULL);
    CHECK(b[2] == 0x450e124938725640ULL);
    CHECK(b[3] == 0x94eb1a7cffd20cbbULL);

    const uint64_t ff = 0xffffffffffffffffULL;
    b = philox::block({0, 0, 0, 0}, {ff, ff});  // counter wraps to zero
    CHECK(b[0] == 0x44b7493d1acfc229ULL);
    CHECK(b[1] == 0x6636af8e997921ddULL);
    CHECK(b[2] == 0x3f73e132b5b3780eULL);
    CHECK(b[3] == 0x605644dde03b01b1ULL);
}

TEST_CASE("uniforms are in (0,1) and streams are independent of order") {
    auto u = philox::uniform4(42, philox::kNoise, {7, 11, 13, 3});
    for (double v : u) {
        CHECK(v > 0.0);
        CHECK(v < 1.0);
    }
    // same counter, same draw irrespective of when it is asked for
    auto u2 = philox::uniform4(42, philox::kNoise, {7, 11, 13, 3});
    CHECK(u == u2);
    // different purpose gives a different stream
    auto u3 = philox::uniform4(42, philox::kInit, {7, 11, 13, 3});
    CHECK(u[0] != u3[0]);
}

TEST_CASE("normal draws have the right first two moments") {
    double sum = 0.0, sum2 = 0.0;
    const int nblocks = 50000;
    for (int i = 0; i < nblocks; ++i) {
        auto n = philox::normal4(1234, philox::kNoise, {0, static_cast<uint64_t>(i), 0, 0});
        for (double v : n) {
            sum += v;
            sum2 += v * v;
        }
    }
    const double count = 4.0 * nblocks;
    const double mean = sum / count;
    const double var = sum2 / count - mean * mean;
    // 3 standard errors
    CHECK(std::fabs(mean) < 3.0 / std::sqrt(count));
    CHECK(std::fabs(var - 1.0) < 3.0 * std::sqrt(2.0 / count));
}
