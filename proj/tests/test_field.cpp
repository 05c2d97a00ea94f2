#include <cmath>
#include <limits>

#include "doctest.h"
#include "pnp/errors.hpp"
#include "pnp/field.hpp"

using namespace pnp;

TEST_CASE("field: construction and indexing") {
    ImageField f(2, 3, 0.5);
    CHECK(f.height() == 2);
    CHECK(f.width() == 3);
    CHECK(f.size() == 6);
    CHECK(f.at(1, 2) == 0.5);

    f.at(0, 1) = -1.5;
    CHECK(f[1] == -1.5);
    CHECK(f.span().size() == 6);

    const ImageField g(2, 3, {1, 2, 3, 4, 5, 6});
    CHECK(g.at(1, 0) == 4.0);
    CHECK(g.same_shape(f));
    CHECK_FALSE(g.same_shape(ImageField(3, 2)));
}

TEST_CASE("field: all_finite flags nan and inf") {
    ImageField f(1, 3, {0.0, 1.0, 2.0});
    CHECK(f.all_finite());
    f[1] = std::numeric_limits<double>::quiet_NaN();
    CHECK_FALSE(f.all_finite());
    f[1] = std::numeric_limits<double>::infinity();
    CHECK_FALSE(f.all_finite());
}

TEST_CASE("field: box projection clamps componentwise") {
    const ImageField x(1, 4, {-2.0, 0.3, 1.0, 7.0});
    const ImageField p = project_box(x, -1.0, 2.0);
    CHECK(p[0] == -1.0);
    CHECK(p[1] == 0.3);
    CHECK(p[2] == 1.0);
    CHECK(p[3] == 2.0);

    ImageField out(1, 4);
    project_box(x, 0.0, 0.5, out);
    CHECK(out[0] == 0.0);
    CHECK(out[3] == 0.5);

    CHECK_THROWS_AS(project_box(x, 2.0, -1.0), ConfigError);
    CHECK_THROWS_AS(project_box(x, 1.0, 1.0), ConfigError);
}

TEST_CASE("field: block downsampling averages 2^level blocks") {
    // 4x4 ramp; the 2x2 block means are easy to write down
    ImageField x(4, 4);
    for (std::size_t r = 0; r < 4; ++r)
        for (std::size_t c = 0; c < 4; ++c)
            x.at(r, c) = static_cast<double>(r * 4 + c);

    const ImageField same = downsample2(x, 0);
    CHECK(same.values() == x.values());

    const ImageField half = downsample2(x, 1);
    CHECK(half.height() == 2);
    CHECK(half.width() == 2);
    CHECK(half.at(0, 0) == doctest::Approx((0.0 + 1 + 4 + 5) / 4.0));
    CHECK(half.at(1, 1) == doctest::Approx((10.0 + 11 + 14 + 15) / 4.0));

    const ImageField quarter = downsample2(x, 2);
    CHECK(quarter.size() == 1);
    CHECK(quarter[0] == doctest::Approx(7.5));

    CHECK_THROWS_AS(downsample2(ImageField(3, 4), 1), DimensionError);
}
