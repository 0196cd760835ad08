#include "gaplab/words.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace gaplab {

Word::Word(int block_size, std::vector<double> flat) : block_size_(block_size), data_(std::move(flat)) {
    if (block_size_ < 1)
        throw Error("DegenerateInput", "Word: block size must be >= 1");
    if (data_.size() % static_cast<std::size_t>(block_size_) != 0)
        throw Error("BlockMismatch", "Word: sample count not a multiple of block size");
}

Word Word::from_letters(int block_size, const std::vector<std::vector<double>>& letters) {
    std::vector<double> flat;
    flat.reserve(letters.size() * static_cast<std::size_t>(block_size));
    for (const auto& l : letters) {
        if (static_cast<int>(l.size()) != block_size)
            throw Error("BlockMismatch", "Word: letter size differs from block size");
        flat.insert(flat.end(), l.begin(), l.end());
    }
    return Word(block_size, std::move(flat));
}

std::span<const double> Word::letter(long i) const {
    return {data_.data() + i * block_size_, static_cast<std::size_t>(block_size_)};
}

double Word::value(long letter_idx, int coord) const {
    if (letter_idx < 0 || letter_idx >= letter_count() || coord < 0 || coord >= block_size_)
        throw Error("DegenerateInput", "Word::value: slot out of range");
    return data_[static_cast<std::size_t>(letter_idx) * block_size_ + coord];
}

Word Word::with_value(long letter_idx, int coord, double v) const {
    if (letter_idx < 0 || letter_idx >= letter_count() || coord < 0 || coord >= block_size_)
        throw Error("DegenerateInput", "Word::with_value: slot out of range");
    Word w = *this;
    w.data_[static_cast<std::size_t>(letter_idx) * block_size_ + coord] = v;
    return w;
}

Word concat(const Word& x, const Word& y) {
    if (x.empty()) return y;
    if (y.empty()) return x;
    if (x.block_size() != y.block_size())
        throw Error("BlockMismatch", "concat: block sizes differ");
    std::vector<double> flat = x.aggregate();
    flat.insert(flat.end(), y.aggregate().begin(), y.aggregate().end());
    return Word(x.block_size(), std::move(flat));
}

Word sharp_power(const Word& x, long m) {
    if (m < 1) throw Error("DegenerateInput", "sharp_power: exponent must be >= 1");
    std::vector<double> flat;
    flat.reserve(x.aggregate().size() * static_cast<std::size_t>(m));
    for (long i = 0; i < m; ++i)
        flat.insert(flat.end(), x.aggregate().begin(), x.aggregate().end());
    return Word(x.block_size(), std::move(flat));
}

Word sieve(const std::vector<double>& v, int k) {
    if (k < 1) throw Error("DegenerateInput", "sieve: k must be >= 1");
    if (v.empty()) throw Error("DegenerateInput", "sieve: empty source");
    std::vector<double> flat(v.size() * static_cast<std::size_t>(k), 0.0);
    for (std::size_t i = 0; i < v.size(); ++i) flat[i * k] = v[i];
    return Word(k, std::move(flat));
}

Word repeat_blocks(const std::vector<double>& v, int k) {
    if (k < 1) throw Error("DegenerateInput", "repeat_blocks: k must be >= 1");
    if (v.empty()) throw Error("DegenerateInput", "repeat_blocks: empty source");
    std::vector<double> flat;
    flat.reserve(v.size() * static_cast<std::size_t>(k));
    for (double x : v)
        for (int j = 0; j < k; ++j) flat.push_back(x);
    return Word(k, std::move(flat));
}

Word insert_between(const std::vector<double>& v, const std::vector<double>& b) {
    if (v.empty()) throw Error("DegenerateInput", "insert_between: empty source");
    const int k = 1 + static_cast<int>(b.size());
    std::vector<double> flat;
    flat.reserve(v.size() * static_cast<std::size_t>(k));
    for (double x : v) {
        flat.push_back(x);
        flat.insert(flat.end(), b.begin(), b.end());
    }
    return Word(k, std::move(flat));
}

std::vector<double> cyclic_shift(const std::vector<double>& v, long j) {
    if (v.empty()) return v;
    const long n = static_cast<long>(v.size());
    long s = j % n;
    if (s < 0) s += n;
    std::vector<double> out(v.size());
    for (long i = 0; i < n; ++i) out[i] = v[(i + s) % n];
    return out;
}

double word_distance(const Word& x, const Word& y, std::uint64_t lcm_cap) {
    if (x.block_size() != y.block_size())
        throw Error("BlockMismatch", "word_distance: block sizes differ");
    if (x.empty() || y.empty())
        throw Error("DegenerateInput", "word_distance: empty word");
    const std::uint64_t nx = static_cast<std::uint64_t>(x.letter_count());
    const std::uint64_t ny = static_cast<std::uint64_t>(y.letter_count());
    const std::uint64_t g = std::gcd(nx, ny);
    const std::uint64_t period = nx / g * ny;
    if (period > lcm_cap)
        throw Error("LcmOverflow", "word_distance: lcm period exceeds cap");
    const int k = x.block_size();
    double dist = 0.0;
    for (std::uint64_t i = 0; i < period; ++i) {
        const auto lx = x.letter(static_cast<long>(i % nx));
        const auto ly = y.letter(static_cast<long>(i % ny));
        for (int c = 0; c < k; ++c)
            dist = std::max(dist, std::fabs(lx[c] - ly[c]));
    }
    return dist;
}

FamilySpec FamilySpec::sieve(int n, std::vector<double> b, double coupling) {
    FamilySpec f;
    f.kind = Kind::Sieve;
    f.n = n;
    f.b = std::move(b);
    f.coupling = coupling;
    f.validate();
    return f;
}

FamilySpec FamilySpec::polymer(int n, double coupling) {
    FamilySpec f;
    f.kind = Kind::Polymer;
    f.n = n;
    f.coupling = coupling;
    f.validate();
    return f;
}

FamilySpec FamilySpec::full_line(double coupling) {
    FamilySpec f;
    f.kind = Kind::FullLine;
    f.n = 1;
    f.coupling = coupling;
    f.validate();
    return f;
}

int FamilySpec::block_size() const {
    switch (kind) {
        case Kind::Sieve: return n + static_cast<int>(b.size());
        case Kind::Polymer: return n;
        case Kind::FullLine: return 1;
    }
    return 1;
}

int FamilySpec::free_coords() const {
    switch (kind) {
        case Kind::Sieve: return n;
        case Kind::Polymer: return 1;  // one value repeated n times
        case Kind::FullLine: return 1;
    }
    return 1;
}

bool FamilySpec::free_coord(int coord) const {
    if (kind == Kind::Sieve) return coord < n;
    if (kind == Kind::Polymer) return true;  // all slots move together
    return coord == 0;
}

Letter FamilySpec::make_letter(std::span<const double> free_values) const {
    if (static_cast<int>(free_values.size()) != free_coords())
        throw Error("BlockMismatch", "make_letter: wrong number of free values");
    Letter l;
    switch (kind) {
        case Kind::Sieve:
            l.values.assign(free_values.begin(), free_values.end());
            l.values.insert(l.values.end(), b.begin(), b.end());
            break;
        case Kind::Polymer:
            l.values.assign(static_cast<std::size_t>(n), free_values[0]);
            break;
        case Kind::FullLine:
            l.values = {free_values[0]};
            break;
    }
    return l;
}

void FamilySpec::validate() const {
    if (coupling == 0.0)
        throw Error("DegenerateInput", "FamilySpec: coupling must be nonzero");
    if (n < 1)
        throw Error("DegenerateInput", "FamilySpec: n must be >= 1");
    if (kind == Kind::Sieve && b.empty() && n < 2)
        return;  // 1-sieve with empty separator degenerates to FullLine; allowed
}

}  // namespace gaplab
