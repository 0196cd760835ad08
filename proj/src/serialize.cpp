#include "gaplab/serialize.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace gaplab {

std::string fmt_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

namespace {

double num_or_nan(const Json& j) {
    if (j.is_null()) return std::numeric_limits<double>::quiet_NaN();
    return j.get<double>();
}

Json window_to_json(const EnergyWindow& w) {
    Json parts = Json::array();
    for (const auto& p : w.parts()) parts.push_back({p.lo, p.hi});
    return parts;
}

EnergyWindow window_from_json(const Json& j) {
    std::vector<Interval> parts;
    for (const auto& p : j) parts.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
    return EnergyWindow(std::move(parts));
}

std::vector<std::pair<double, double>> pairs_from_json(const Json& j) {
    std::vector<std::pair<double, double>> out;
    for (const auto& p : j) out.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
    return out;
}

Json pairs_to_json(const std::vector<std::pair<double, double>>& v) {
    Json out = Json::array();
    for (const auto& [a, b] : v) out.push_back({a, b});
    return out;
}

}  // namespace

Json word_to_json(const Word& w) {
    Json letters = Json::array();
    for (long i = 0; i < w.letter_count(); ++i) {
        Json l = Json::array();
        for (double v : w.letter(i)) l.push_back(v);
        letters.push_back(std::move(l));
    }
    return Json{{"block_size", w.block_size()}, {"letters", std::move(letters)}};
}

Word word_from_json(const Json& j) {
    const int k = j.at("block_size").get<int>();
    std::vector<std::vector<double>> letters;
    for (const auto& l : j.at("letters")) letters.push_back(l.get<std::vector<double>>());
    return Word::from_letters(k, letters);
}

Json bandset_to_json(const BandSet& b) {
    Json bands = Json::array();
    for (const auto& iv : b.bands) bands.push_back({iv.lo, iv.hi});
    return Json{{"q", b.q}, {"bands", std::move(bands)}, {"total_measure", b.total_measure()}};
}

BandSet bandset_from_json(const Json& j) {
    BandSet b;
    b.q = j.at("q").get<long>();
    for (const auto& iv : j.at("bands"))
        b.bands.push_back({iv.at(0).get<double>(), iv.at(1).get<double>()});
    return b;
}

std::string bands_to_csv(const BandSet& b) {
    std::ostringstream os;
    os << "band_index,E_minus,E_plus\n";
    for (std::size_t i = 0; i < b.bands.size(); ++i)
        os << (i + 1) << ',' << fmt_double(b.bands[i].lo) << ',' << fmt_double(b.bands[i].hi)
           << '\n';
    return os.str();
}

BandSet bands_from_csv(const std::string& text) {
    std::istringstream is(text);
    std::string line;
    if (!std::getline(is, line) || line.rfind("band_index", 0) != 0)
        throw Error("DegenerateInput", "band CSV missing header");
    BandSet b;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        long idx;
        double lo, hi;
        if (std::sscanf(line.c_str(), "%ld,%lf,%lf", &idx, &lo, &hi) != 3)
            throw Error("DegenerateInput", "band CSV row malformed");
        b.bands.push_back({lo, hi});
    }
    b.q = static_cast<long>(b.bands.size());
    return b;
}

Json certificate_to_json(const GapCertificate& c) {
    return Json{{"word", word_to_json(c.word)},
                {"energy", c.energy},
                {"trace", c.trace},
                {"distance", c.distance_to_input}};
}

Json cover_to_json(const GapCover& c) {
    Json members = Json::array();
    for (const auto& m : c.members) {
        Json covered = Json::array();
        for (const auto& iv : m.covered) covered.push_back({iv.lo, iv.hi});
        members.push_back(Json{{"word", word_to_json(m.word)},
                               {"raw_blocks", m.raw_blocks},
                               {"covered", std::move(covered)}});
    }
    return Json{{"t", c.t}, {"m", c.m()}, {"members", std::move(members)}};
}

Json thin_traces_to_json(const std::vector<ThinTrace>& traces) {
    Json out = Json::array();
    for (const auto& tr : traces)
        out.push_back(Json{{"N", tr.N},
                           {"u", tr.u},
                           {"word_length", tr.word_length},
                           {"measure_by_lambda", pairs_to_json(tr.measure_by_lambda)},
                           {"L_min_estimate", tr.L_min_estimate},
                           {"c0", tr.c0}});
    return out;
}

std::string thin_traces_to_csv(const std::vector<ThinTrace>& traces) {
    std::ostringstream os;
    os << "N,u,lambda,measure\n";
    for (const auto& tr : traces)
        for (const auto& [lam, meas] : tr.measure_by_lambda)
            os << tr.N << ',' << tr.u << ',' << fmt_double(lam) << ',' << fmt_double(meas)
               << '\n';
    return os.str();
}

std::vector<ThinTrace> thin_traces_from_csv(const std::string& text) {
    std::istringstream is(text);
    std::string line;
    if (!std::getline(is, line) || line.rfind("N,u,lambda,measure", 0) != 0)
        throw Error("DegenerateInput", "thin CSV missing header");
    std::vector<ThinTrace> out;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        long N, u;
        double lam, meas;
        if (std::sscanf(line.c_str(), "%ld,%ld,%lf,%lf", &N, &u, &lam, &meas) != 4)
            throw Error("DegenerateInput", "thin CSV row malformed");
        if (out.empty() || out.back().N != N) {
            ThinTrace tr;
            tr.N = N;
            tr.u = u;
            out.push_back(std::move(tr));
        }
        out.back().measure_by_lambda.emplace_back(lam, meas);
    }
    return out;
}

Json stages_to_json(const std::vector<StageState>& states) {
    Json out = Json::array();
    for (const auto& st : states) {
        Json bands = Json::array();
        for (const auto& [lam, bs] : st.bands_by_lambda)
            bands.push_back({lam, bandset_to_json(bs)});
        out.push_back(Json{{"stage", st.stage},
                           {"word", word_to_json(st.x)},
                           {"eps", st.eps},
                           {"eta", st.eta},
                           {"p", st.p},
                           {"window", window_to_json(st.F)},
                           {"measure_by_lambda", pairs_to_json(st.measure_by_lambda)},
                           {"bands_by_lambda", std::move(bands)}});
    }
    return out;
}

std::vector<StageState> stages_from_json(const Json& j) {
    std::vector<StageState> out;
    for (const auto& s : j) {
        StageState st;
        st.stage = s.at("stage").get<int>();
        st.x = word_from_json(s.at("word"));
        st.eps = num_or_nan(s.at("eps"));
        st.eta = num_or_nan(s.at("eta"));
        st.p = s.at("p").get<long>();
        st.F = window_from_json(s.at("window"));
        st.measure_by_lambda = pairs_from_json(s.at("measure_by_lambda"));
        if (s.contains("bands_by_lambda"))
            for (const auto& b : s.at("bands_by_lambda"))
                st.bands_by_lambda.emplace_back(b.at(0).get<double>(),
                                                bandset_from_json(b.at(1)));
        out.push_back(std::move(st));
    }
    return out;
}

Json continuum_word_to_json(const ContinuumWord& w) {
    Json cells = Json::array();
    for (const auto& c : w.cells) cells.push_back(Json{{"a", c.a}, {"samples", c.samples}});
    return Json{{"cells", std::move(cells)}};
}

ContinuumWord continuum_word_from_json(const Json& j) {
    ContinuumWord w;
    for (const auto& c : j.at("cells")) {
        CellPotential cell;
        cell.a = c.at("a").get<double>();
        cell.samples = c.at("samples").get<std::vector<double>>();
        cell.validate();
        w.cells.push_back(std::move(cell));
    }
    if (w.cells.empty()) throw Error("DegenerateInput", "continuum word has no cells");
    return w;
}

}  // namespace gaplab
