#include "grnn/tasks.hpp"

#include <algorithm>
#include <numeric>

namespace grnn {

std::uint64_t fibonacci_value(unsigned n) {
    if (n == 0) throw ValueError("fibonacci index starts at 1");
    std::uint64_t a = 1, b = 1;  // F(1), F(2)
    if (n <= 2) return 1;
    for (unsigned i = 3; i <= n; ++i) {
        std::uint64_t next;
        if (__builtin_add_overflow(a, b, &next)) throw Overflow("fibonacci value exceeds 64 bits");
        a = b;
        b = next;
    }
    return b;
}

std::uint64_t collatz_steps(std::uint64_t n) {
    if (n == 0) throw ValueError("trajectory is defined for positive integers");
    std::uint64_t steps = 0;
    while (n != 1) {
        if (n % 2 == 0) {
            n /= 2;
        } else {
            std::uint64_t tripled;
            if (__builtin_mul_overflow(n, std::uint64_t{3}, &tripled) ||
                __builtin_add_overflow(tripled, std::uint64_t{1}, &n)) {
                throw Overflow("trajectory value exceeds 64 bits");
            }
        }
        if (++steps > 1000000) throw Overflow("trajectory exceeds one million steps");
    }
    return steps;
}

std::vector<std::uint64_t> lucky_numbers(std::uint64_t limit) {
    std::vector<std::uint64_t> v;
    for (std::uint64_t i = 1; i <= limit; i += 2) v.push_back(i);
    std::size_t idx = 1;  // next sieving value is the second survivor (3)
    while (idx < v.size()) {
        std::uint64_t k = v[idx];
        if (k > v.size()) break;  // deleting every k-th removes nothing now
        std::vector<std::uint64_t> next;
        next.reserve(v.size() - v.size() / k);
        for (std::size_t i = 0; i < v.size(); ++i) {
            if ((i + 1) % k != 0) next.push_back(v[i]);
        }
        v = std::move(next);
        ++idx;
    }
    return v;
}

std::vector<std::uint64_t> primes_upto(std::uint64_t limit) {
    std::vector<std::uint64_t> out;
    for (std::uint64_t i = 2; i <= limit; ++i) {
        if (is_prime(i)) out.push_back(i);
    }
    return out;
}

bool is_prime(std::uint64_t n) {
    if (n < 2) return false;
    for (std::uint64_t d = 2; d * d <= n; ++d) {
        if (n % d == 0) return false;
    }
    return true;
}

bool is_fibonacci(std::uint64_t n) {
    std::uint64_t a = 1, b = 1;
    if (n == 1) return true;
    while (b < n) {
        std::uint64_t next;
        if (__builtin_add_overflow(a, b, &next)) return false;
        a = b;
        b = next;
    }
    return b == n;
}

std::uint64_t cycle_length(std::uint64_t n) {
    if (n == 0) throw ValueError("cycle length is defined for positive integers");
    while (n % 2 == 0) n /= 2;
    while (n % 5 == 0) n /= 5;
    if (n == 1) return 0;  // terminating expansion
    // multiplicative order of 10 modulo n
    std::uint64_t r = 10 % n;
    std::uint64_t k = 1;
    while (r != 1) {
        r = static_cast<std::uint64_t>((static_cast<unsigned __int128>(r) * 10) % n);
        ++k;
    }
    return k;
}

std::vector<std::vector<std::uint8_t>> step_counts_to_bit_patterns(
    std::span<const std::uint64_t> counts, unsigned bit_width) {
    if (bit_width == 0 || bit_width >= 64) throw ValueError("bit width must be in [1, 63]");
    for (std::uint64_t c : counts) {
        if (c >> bit_width) throw Overflow("count does not fit in the requested bit width");
    }
    std::vector<std::vector<std::uint8_t>> patterns(bit_width,
                                                    std::vector<std::uint8_t>(counts.size(), 0));
    for (unsigned b = 0; b < bit_width; ++b) {
        for (std::size_t i = 0; i < counts.size(); ++i) {
            patterns[b][i] = static_cast<std::uint8_t>((counts[i] >> b) & 1u);
        }
    }
    return patterns;
}

CalculationTask multiplication_spec(double m, std::span<const int> codes, double epsilon) {
    if (!(m > 0.0)) throw ValueError("multiplier must be positive");
    CalculationTask task;
    task.epsilon = epsilon;
    for (int code : codes) {
        if (code <= 0) throw SpecError("multiplication task needs positive input codes");
        task.expected_fold[code] = m * static_cast<double>(code);
    }
    return task;
}

namespace {

std::vector<int> default_codes(const std::string& name) {
    if (name == "fibonacci") return {1, 2, 3, 4, 5, 6};
    return {1, 2, 3, 4, 5, 6, 7};
}

unsigned bit_length(std::uint64_t v) {
    unsigned bits = 0;
    while (v) {
        ++bits;
        v >>= 1;
    }
    return bits ? bits : 1;
}

ClassificationTask membership_task(std::span<const int> codes, bool (*member)(std::uint64_t)) {
    ClassificationTask task;
    for (int code : codes) {
        if (code <= 0) throw SpecError("classification tasks need positive input codes");
        if (member(static_cast<std::uint64_t>(code))) task.target_codes.insert(code);
    }
    if (task.target_codes.empty() || task.target_codes.size() == static_cast<std::size_t>(codes.size())) {
        throw SpecError("classification target set must be a non-empty proper subset of the codes");
    }
    return task;
}

bool is_lucky_small(std::uint64_t n) {
    auto lucky = lucky_numbers(n);
    return std::find(lucky.begin(), lucky.end(), n) != lucky.end();
}

bool has_unit_cycle(std::uint64_t n) { return cycle_length(n) == 1; }

}  // namespace

TaskSpec make_task(const std::string& name) {
    auto codes = default_codes(name);
    return make_task(name, codes);
}

TaskSpec make_task(const std::string& name, std::span<const int> codes) {
    if (codes.empty()) throw SpecError("task needs at least one input code");
    TaskSpec spec;
    spec.name = name;
    if (name == "fibonacci") {
        CalculationTask task;
        for (int code : codes) {
            if (code <= 0) throw SpecError("fibonacci task needs positive input codes");
            task.expected_fold[code] = static_cast<double>(fibonacci_value(static_cast<unsigned>(code)));
        }
        spec.detail = std::move(task);
    } else if (name.size() == 5 && name.rfind("mult", 0) == 0 && name[4] >= '2' && name[4] <= '9') {
        spec.detail = multiplication_spec(static_cast<double>(name[4] - '0'), codes);
    } else if (name == "collatz") {
        BinaryTask task;
        std::uint64_t max_count = 0;
        for (int code : codes) {
            if (code <= 0) throw SpecError("collatz task needs positive input codes");
            std::uint64_t steps = collatz_steps(static_cast<std::uint64_t>(code));
            task.expected_values.push_back(steps);
            max_count = std::max(max_count, steps);
        }
        task.bit_patterns = step_counts_to_bit_patterns(task.expected_values, bit_length(max_count));
        spec.detail = std::move(task);
    } else if (name == "lucky") {
        spec.detail = membership_task(codes, &is_lucky_small);
    } else if (name == "prime") {
        spec.detail = membership_task(codes, &is_prime);
    } else if (name == "fib-member") {
        spec.detail = membership_task(codes, &is_fibonacci);
    } else if (name == "decimal-cycle") {
        spec.detail = membership_task(codes, &has_unit_cycle);
    } else {
        throw SpecError("unknown task '" + name + "'");
    }
    return spec;
}

std::vector<std::string> builtin_task_names() {
    return {"fibonacci", "mult2",  "mult3", "mult4",      "mult5",
            "collatz",   "lucky",  "prime", "fib-member", "decimal-cycle"};
}

std::vector<std::uint64_t> expected_outputs(const std::string& name, std::span<const int> codes) {
    std::vector<std::uint64_t> out;
    out.reserve(codes.size());
    for (int code : codes) {
        if (code <= 0) throw SpecError("expected outputs need positive input codes");
        std::uint64_t i = static_cast<std::uint64_t>(code);
        if (name == "fibonacci") {
            out.push_back(fibonacci_value(static_cast<unsigned>(code)));
        } else if (name.size() == 5 && name.rfind("mult", 0) == 0 && name[4] >= '2' && name[4] <= '9') {
            out.push_back(static_cast<std::uint64_t>(name[4] - '0') * i);
        } else if (name == "collatz") {
            out.push_back(collatz_steps(i));
        } else if (name == "lucky") {
            out.push_back(is_lucky_small(i) ? 1 : 0);
        } else if (name == "prime") {
            out.push_back(is_prime(i) ? 1 : 0);
        } else if (name == "fib-member") {
            out.push_back(is_fibonacci(i) ? 1 : 0);
        } else if (name == "decimal-cycle") {
            out.push_back(has_unit_cycle(i) ? 1 : 0);
        } else {
            throw SpecError("unknown task '" + name + "'");
        }
    }
    return out;
}

}  // namespace grnn
