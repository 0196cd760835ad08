#include "gaplab/words.hpp"

#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "doctest.h"

using namespace gaplab;

namespace {

// sup distance over one lcm period, by brute force on the periodic extensions
double brute_distance(const Word& x, const Word& y, long horizon) {
    double d = 0.0;
    const auto& xa = x.aggregate();
    const auto& ya = y.aggregate();
    for (long i = 0; i < horizon; ++i) {
        double dx = xa[i % xa.size()] - ya[i % ya.size()];
        d = std::max(d, std::fabs(dx));
    }
    return d;
}

Word random_word(std::mt19937_64& rng, int block, long letters) {
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    std::vector<double> flat;
    for (long i = 0; i < letters * block; ++i) flat.push_back(u(rng));
    return Word(block, std::move(flat));
}

}  // namespace

TEST_CASE("concatenation is order preserving") {
    Word x(1, {1.0, 2.0});
    Word y(1, {3.0});
    Word xy = concat(x, y);
    CHECK(xy.letter_count() == 3);
    CHECK(xy.aggregate() == std::vector<double>{1.0, 2.0, 3.0});
    CHECK_THROWS_AS(concat(x, Word(2, {0.0, 0.0})), Error);
}

TEST_CASE("sharp power repeats the word") {
    Word x(2, {1.0, 2.0});
    Word x3 = sharp_power(x, 3);
    CHECK(x3.letter_count() == 3);
    CHECK(x3.aggregate() == std::vector<double>{1.0, 2.0, 1.0, 2.0, 1.0, 2.0});
    CHECK(sharp_power(x, 1) == x);
    CHECK_THROWS_AS(sharp_power(x, 0), Error);
}

TEST_CASE("sieve inserts k-1 zeros after every entry") {
    Word s = sieve({5.0, 7.0}, 3);
    CHECK(s.block_size() == 3);
    CHECK(s.letter_count() == 2);
    CHECK(s.aggregate() == std::vector<double>{5.0, 0.0, 0.0, 7.0, 0.0, 0.0});
    // extended periodically: nonzero exactly on multiples of k
    const auto& a = s.aggregate();
    for (long n = 0; n < 12; ++n) {
        double v = a[n % a.size()];
        if (n % 3 == 0) CHECK(v != 0.0);
        else CHECK(v == 0.0);
    }
}

TEST_CASE("repeat duplicates each entry k times") {
    Word r = repeat_blocks({5.0, 7.0}, 2);
    CHECK(r.block_size() == 2);
    CHECK(r.aggregate() == std::vector<double>{5.0, 5.0, 7.0, 7.0});
}

TEST_CASE("insert_between appends the separator to every letter") {
    Word w = insert_between({1.0, 2.0}, {9.0, 8.0});
    CHECK(w.block_size() == 3);
    CHECK(w.aggregate() == std::vector<double>{1.0, 9.0, 8.0, 2.0, 9.0, 8.0});
}

TEST_CASE("cyclic shift") {
    CHECK(cyclic_shift({1.0, 2.0, 3.0}, 1) == std::vector<double>{2.0, 3.0, 1.0});
    CHECK(cyclic_shift({1.0, 2.0, 3.0}, -1) == std::vector<double>{3.0, 1.0, 2.0});
    CHECK(cyclic_shift({1.0, 2.0, 3.0}, 3) == std::vector<double>{1.0, 2.0, 3.0});
}

TEST_CASE("word distance matches the brute-force sup over one lcm period") {
    std::mt19937_64 rng(21);
    for (int rep = 0; rep < 40; ++rep) {
        Word x = random_word(rng, 1, 3 + rep % 3);
        Word y = random_word(rng, 1, 4 + rep % 2);
        long lcm = std::lcm(x.letter_count(), y.letter_count());
        CHECK(word_distance(x, y) ==
              doctest::Approx(brute_distance(x, y, lcm)).epsilon(1e-15));
    }
}

TEST_CASE("word distance is a pseudometric across sharp powers") {
    std::mt19937_64 rng(22);
    Word x = random_word(rng, 2, 5);
    CHECK(word_distance(x, sharp_power(x, 3)) == 0.0);
    CHECK(word_distance(sharp_power(x, 2), sharp_power(x, 3)) == 0.0);
}

TEST_CASE("word distance refuses blown lcm periods") {
    // 1009 and 1013 are coprime, lcm > 1e6
    std::mt19937_64 rng(23);
    Word x = random_word(rng, 1, 1009);
    Word y = random_word(rng, 1, 1013);
    CHECK_THROWS_AS(word_distance(x, y), Error);
    try {
        word_distance(x, y);
    } catch (const Error& e) {
        CHECK(e.code() == "LcmOverflow");
    }
}

TEST_CASE("family specs validate and expose their free slots") {
    FamilySpec sv = FamilySpec::sieve(1, {0.0});
    CHECK(sv.block_size() == 2);
    CHECK(sv.free_coords() == 1);
    CHECK(sv.free_coord(0));
    CHECK(!sv.free_coord(1));

    FamilySpec s2 = FamilySpec::sieve(2, {0.5, -0.5});
    CHECK(s2.block_size() == 4);
    CHECK(s2.free_coords() == 2);

    FamilySpec po = FamilySpec::polymer(3);
    CHECK(po.block_size() == 3);
    CHECK(po.free_coords() == 1);

    FamilySpec fl = FamilySpec::full_line();
    CHECK(fl.block_size() == 1);

    FamilySpec bad = FamilySpec::full_line();
    bad.coupling = 0.0;
    CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("family letters have the declared shape") {
    FamilySpec sv = FamilySpec::sieve(2, {9.0});
    std::vector<double> x{1.0, 2.0};
    Letter l = sv.make_letter(x);
    CHECK(l.values == std::vector<double>{1.0, 2.0, 9.0});

    FamilySpec po = FamilySpec::polymer(3);
    Letter lp = po.make_letter(std::vector<double>{4.0});
    CHECK(lp.values == std::vector<double>{4.0, 4.0, 4.0});
}

TEST_CASE("with_value changes exactly one slot") {
    Word x(2, {1.0, 2.0, 3.0, 4.0});
    Word y = x.with_value(1, 0, 9.0);
    CHECK(y.aggregate() == std::vector<double>{1.0, 2.0, 9.0, 4.0});
    CHECK(x.aggregate() == std::vector<double>{1.0, 2.0, 3.0, 4.0});
    CHECK_THROWS_AS(x.with_value(2, 0, 0.0), Error);
}
