// words.hpp - finite words over block alphabets in R^k, with the sup metric
// on periodic extensions. Concatenation is written # throughout the comments.
#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "gaplab/mat2.hpp"

namespace gaplab {

struct Letter {
    std::vector<double> values;  // one block in R^k
};

// A finite word over R^k, stored flat (letter i occupies values [i*k, (i+1)*k)).
// Flattening a word into its sample sequence is aggregate(); it is the
// potential the transfer operators act on.
class Word {
public:
    Word() = default;
    Word(int block_size, std::vector<double> flat);
    static Word from_letters(int block_size, const std::vector<std::vector<double>>& letters);

    int block_size() const { return block_size_; }
    long letter_count() const { return static_cast<long>(data_.size()) / block_size_; }
    long site_count() const { return static_cast<long>(data_.size()); }
    bool empty() const { return data_.empty(); }

    std::span<const double> letter(long i) const;
    const std::vector<double>& aggregate() const { return data_; }

    double value(long letter_idx, int coord) const;
    Word with_value(long letter_idx, int coord, double v) const;  // copy with one slot changed

    bool operator==(const Word& o) const = default;

private:
    int block_size_ = 1;
    std::vector<double> data_;
};

Word concat(const Word& x, const Word& y);        // x # y
Word sharp_power(const Word& x, long m);          // x # x # ... (m copies)

// k-sieve of v: between consecutive entries of v insert k-1 zeros; block size k.
// Extended periodically the aggregate satisfies V(n/k) at multiples of k, 0 off them.
Word sieve(const std::vector<double>& v, int k);

// each entry of v repeated k times in a row; block size k
Word repeat_blocks(const std::vector<double>& v, int k);

// letters v_i # b for a fixed separator block b; block size 1 + |b|
Word insert_between(const std::vector<double>& v, const std::vector<double>& b);

std::vector<double> cyclic_shift(const std::vector<double>& v, long j);

// sup distance between the periodic extensions, evaluated over one lcm period.
// Not a metric across #-powers: d(x^{#a}, x^{#b}) = 0. Letter blocks must match.
double word_distance(const Word& x, const Word& y, std::uint64_t lcm_cap = 1000000);

// One-parameter block families the gap machinery knows how to perturb.
//   Sieve(n, b):  letters x # b with x in R^n (free slots: first n coords)
//   Polymer(n):   letters v^{#n}, one free value repeated n times
//   FullLine:     letters are single reals
struct FamilySpec {
    enum class Kind { Sieve, Polymer, FullLine };

    Kind kind = Kind::FullLine;
    int n = 1;                  // free slots (Sieve) or repetition count (Polymer)
    std::vector<double> b;      // Sieve separator block
    double coupling = 1.0;      // lambda != 0, multiplies the whole potential

    static FamilySpec sieve(int n, std::vector<double> b, double coupling = 1.0);
    static FamilySpec polymer(int n, double coupling = 1.0);
    static FamilySpec full_line(double coupling = 1.0);

    int block_size() const;
    int free_coords() const;            // per-letter degrees of freedom
    bool free_coord(int coord) const;   // is this in-block slot adjustable?
    Letter make_letter(std::span<const double> free_values) const;
    void validate() const;              // throws Error("DegenerateInput")
};

}  // namespace gaplab
