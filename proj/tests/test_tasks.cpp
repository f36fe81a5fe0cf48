#include <doctest.h>

#include <algorithm>
#include <cstdint>
#include <map>
#include <set>
#include <vector>

#include "grnn/errors.hpp"
#include "grnn/tasks.hpp"

using namespace grnn;

namespace {

// Independent simulation oracle; __int128 keeps 3n+1 exact well past uint64.
std::uint64_t collatz_oracle(std::uint64_t n) {
    __int128 v = n;
    std::uint64_t steps = 0;
    while (v != 1) {
        v = (v % 2 == 0) ? v / 2 : 3 * v + 1;
        ++steps;
    }
    return steps;
}

// Literal lucky sieve on a materialized list: delete every k-th survivor,
// with k walking the sequence itself.
std::vector<std::uint64_t> lucky_oracle(std::uint64_t limit) {
    std::vector<std::uint64_t> v;
    for (std::uint64_t i = 1; i <= limit; i += 2) v.push_back(i);
    std::size_t idx = 1;  // the entry whose VALUE gives the next deletion stride
    while (idx < v.size() && v[idx] <= v.size()) {
        std::uint64_t k = v[idx];
        if (k < 2) break;
        std::vector<std::uint64_t> next;
        for (std::size_t i = 0; i < v.size(); ++i)
            if ((i + 1) % k != 0) next.push_back(v[i]);
        v = std::move(next);
        ++idx;
    }
    return v;
}

bool prime_oracle(std::uint64_t n) {
    if (n < 2) return false;
    for (std::uint64_t d = 2; d * d <= n; ++d)
        if (n % d == 0) return false;
    return true;
}

// Repetend length by literal long division: track remainders until one repeats.
std::uint64_t cycle_oracle(std::uint64_t n) {
    std::map<std::uint64_t, std::uint64_t> seen;  // remainder -> digit position
    std::uint64_t r = 1 % n;
    std::uint64_t pos = 0;
    while (r != 0) {
        auto it = seen.find(r);
        if (it != seen.end()) return pos - it->second;
        seen[r] = pos;
        r = (r * 10) % n;
        ++pos;
    }
    return 0;  // terminating expansion
}

}  // namespace

TEST_CASE("fibonacci pins and recurrence") {
    const std::uint64_t expect[] = {1, 1, 2, 3, 5, 8};
    for (unsigned n = 1; n <= 6; ++n) CHECK(fibonacci_value(n) == expect[n - 1]);
    for (unsigned n = 3; n <= 93; ++n)
        CHECK(fibonacci_value(n) == fibonacci_value(n - 1) + fibonacci_value(n - 2));
    CHECK(fibonacci_value(93) == 12200160415121876738ull);
    CHECK_THROWS_AS(fibonacci_value(0), ValueError);
    CHECK_THROWS_AS(fibonacci_value(94), Overflow);
}

TEST_CASE("collatz pins and oracle sweep") {
    const std::uint64_t expect[] = {0, 1, 7, 2, 5, 8, 16};
    for (std::uint64_t n = 1; n <= 7; ++n) CHECK(collatz_steps(n) == expect[n - 1]);
    CHECK(collatz_steps(27) == 111);
    for (std::uint64_t n = 1; n <= 1000; ++n) CHECK(collatz_steps(n) == collatz_oracle(n));
    CHECK_THROWS_AS(collatz_steps(0), ValueError);
    // 3n+1 would leave uint64
    CHECK_THROWS_AS(collatz_steps(0xffffffffffffffffull), Overflow);
}

TEST_CASE("lucky numbers match a literal sieve") {
    CHECK(lucky_numbers(7) == std::vector<std::uint64_t>{1, 3, 7});
    auto ours = lucky_numbers(200);
    auto oracle = lucky_oracle(200);
    CHECK(ours == oracle);
    // first luckies from the literature
    std::vector<std::uint64_t> head{1, 3, 7, 9, 13, 15, 21, 25, 31, 33};
    REQUIRE(ours.size() >= head.size());
    CHECK(std::equal(head.begin(), head.end(), ours.begin()));
}

TEST_CASE("primes match trial division") {
    CHECK(primes_upto(7) == std::vector<std::uint64_t>{2, 3, 5, 7});
    for (std::uint64_t n = 0; n <= 500; ++n) CHECK(is_prime(n) == prime_oracle(n));
    auto ps = primes_upto(500);
    std::vector<std::uint64_t> expect;
    for (std::uint64_t n = 2; n <= 500; ++n)
        if (prime_oracle(n)) expect.push_back(n);
    CHECK(ps == expect);
}

TEST_CASE("fibonacci membership") {
    std::set<std::uint64_t> members;
    for (unsigned n = 1; n <= 93; ++n) members.insert(fibonacci_value(n));
    for (std::uint64_t v = 0; v <= 10000; ++v) CHECK(is_fibonacci(v) == (members.count(v) != 0));
    std::set<std::uint64_t> small;
    for (std::uint64_t v = 1; v <= 7; ++v)
        if (is_fibonacci(v)) small.insert(v);
    CHECK(small == std::set<std::uint64_t>{1, 2, 3, 5});
}

TEST_CASE("decimal cycle length matches long division") {
    for (std::uint64_t n = 1; n <= 500; ++n) CHECK(cycle_length(n) == cycle_oracle(n));
    CHECK(cycle_length(3) == 1);
    CHECK(cycle_length(6) == 1);
    CHECK(cycle_length(7) == 6);
    CHECK(cycle_length(17) == 16);
    for (std::uint64_t n : {1ull, 2ull, 4ull, 5ull, 8ull, 10ull}) CHECK(cycle_length(n) == 0);
    std::set<std::uint64_t> ones;
    for (std::uint64_t n = 1; n <= 7; ++n)
        if (cycle_length(n) == 1) ones.insert(n);
    CHECK(ones == std::set<std::uint64_t>{3, 6});
    CHECK_THROWS_AS(cycle_length(0), ValueError);
}

TEST_CASE("bit plane decomposition of the collatz column") {
    std::vector<std::uint64_t> counts{0, 1, 7, 2, 5, 8, 16};
    auto planes = step_counts_to_bit_patterns(counts, 5);
    REQUIRE(planes.size() == 5);
    CHECK(planes[0] == std::vector<std::uint8_t>{0, 1, 1, 0, 1, 0, 0});
    CHECK(planes[1] == std::vector<std::uint8_t>{0, 0, 1, 1, 0, 0, 0});
    CHECK(planes[2] == std::vector<std::uint8_t>{0, 0, 1, 0, 1, 0, 0});
    CHECK(planes[3] == std::vector<std::uint8_t>{0, 0, 0, 0, 0, 1, 0});
    CHECK(planes[4] == std::vector<std::uint8_t>{0, 0, 0, 0, 0, 0, 1});
    // reassemble
    for (std::size_t pos = 0; pos < counts.size(); ++pos) {
        std::uint64_t v = 0;
        for (std::size_t b = 0; b < planes.size(); ++b) v |= std::uint64_t(planes[b][pos]) << b;
        CHECK(v == counts[pos]);
    }
    CHECK_THROWS_AS(step_counts_to_bit_patterns(counts, 4), Overflow);  // 16 needs bit 4
}

TEST_CASE("builtin task construction") {
    auto names = builtin_task_names();
    CHECK(std::find(names.begin(), names.end(), "fibonacci") != names.end());
    CHECK(std::find(names.begin(), names.end(), "collatz") != names.end());

    auto fib = make_task("fibonacci");
    REQUIRE(fib.is_calculation());
    const auto& folds = fib.calculation().expected_fold;
    REQUIRE(folds.size() == 6);  // codes 1..6 by default
    for (int c = 1; c <= 6; ++c) CHECK(folds.at(c) == double(fibonacci_value(unsigned(c))));

    auto mult3 = make_task("mult3");
    REQUIRE(mult3.is_calculation());
    for (int c = 1; c <= 7; ++c) CHECK(mult3.calculation().expected_fold.at(c) == 3.0 * c);

    auto lucky = make_task("lucky");
    REQUIRE(lucky.is_classification());
    CHECK(lucky.classification().target_codes == std::set<int>{1, 3, 7});

    auto prime = make_task("prime");
    CHECK(prime.classification().target_codes == std::set<int>{2, 3, 5, 7});

    auto fibm = make_task("fib-member");
    CHECK(fibm.classification().target_codes == std::set<int>{1, 2, 3, 5});

    auto cyc = make_task("decimal-cycle");
    CHECK(cyc.classification().target_codes == std::set<int>{3, 6});

    auto clz = make_task("collatz");
    REQUIRE(clz.is_binary());
    CHECK(clz.binary().bit_patterns.size() == 5);
    CHECK(clz.binary().expected_values == std::vector<std::uint64_t>{0, 1, 7, 2, 5, 8, 16});

    CHECK_THROWS_AS(make_task("no-such-task"), SpecError);
}

TEST_CASE("tasks over custom codes") {
    std::vector<int> codes{1, 2, 3};
    auto clz = make_task("collatz", codes);
    REQUIRE(clz.is_binary());
    // counts (0,1,7) need 3 bits
    CHECK(clz.binary().bit_patterns.size() == 3);
    CHECK(clz.binary().expected_values == std::vector<std::uint64_t>{0, 1, 7});

    auto m2 = multiplication_spec(2.0, codes);
    CHECK(m2.expected_fold == std::map<int, double>{{1, 2.0}, {2, 4.0}, {3, 6.0}});

    // a classification task whose targets would not be a proper subset is unsatisfiable
    CHECK_THROWS_AS(make_task("lucky", std::vector<int>{1, 3}), SpecError);
}

TEST_CASE("expected outputs mirror the oracles") {
    std::vector<int> codes{1, 2, 3, 4, 5, 6, 7};
    CHECK(expected_outputs("collatz", codes) == std::vector<std::uint64_t>{0, 1, 7, 2, 5, 8, 16});
    CHECK(expected_outputs("prime", codes) == std::vector<std::uint64_t>{0, 1, 1, 0, 1, 0, 1});
    std::vector<int> fib_codes{1, 2, 3, 4, 5, 6};
    CHECK(expected_outputs("fibonacci", fib_codes) == std::vector<std::uint64_t>{1, 1, 2, 3, 5, 8});
    CHECK(expected_outputs("mult4", std::vector<int>{2, 5}) == std::vector<std::uint64_t>{8, 20});
}
