// gaplab - batch front door for the band / thin-spectrum / dimension /
// continuum pipelines. Exit codes: 0 ok, 2 config or validation failure,
// 3 typed numeric failure (the error name is printed to stderr).
#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "gaplab/serialize.hpp"

using namespace gaplab;

namespace {

struct RunConfig {
    std::string subcommand;
    std::string family = "fullline";
    std::string word;
    std::string window;
    std::vector<double> couplings{1.0};
    std::vector<long> n_list;
    int stages = 0;
    double grid_step = 0.05;
    double eps = 0.5;
    int depth_cap = 20;
    long seed = 1;
    std::string out = "out";
    int workers = 0;
    std::string input;  // dimension: band CSV or stage JSON
    std::vector<double> eps_list;
    // continuum gap query
    std::string gap_mode;  // "", "repeat", "sieve"
    double gap_a = 1.0;
    int gap_n = 1;
    double gap_e = 0.0;
    double lambda_max = 0.0;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("DegenerateInput", "cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("DegenerateInput", "cannot write " + path);
    out << text;
}

bool looks_numeric(const std::string& s) {
    if (s.empty()) return false;
    for (char c : s)
        if (!(std::isdigit(static_cast<unsigned char>(c)) || c == ',' || c == '.' || c == '-' ||
              c == '+' || c == 'e' || c == 'E' || c == ' '))
            return false;
    return true;
}

std::vector<double> parse_doubles(const std::string& s) {
    std::vector<double> out;
    std::istringstream is(s);
    std::string tok;
    while (std::getline(is, tok, ',')) {
        if (tok.empty()) continue;
        std::size_t pos = 0;
        double v = std::stod(tok, &pos);
        out.push_back(v);
    }
    return out;
}

Word parse_word(const std::string& spec) {
    if (spec.empty()) throw Error("DegenerateInput", "no word given");
    if (spec.front() == '{') return word_from_json(Json::parse(spec));
    if (looks_numeric(spec)) {
        std::vector<double> vals = parse_doubles(spec);
        if (vals.empty()) throw Error("DegenerateInput", "word shorthand is empty");
        return Word(1, std::move(vals));
    }
    return word_from_json(Json::parse(read_file(spec)));
}

ContinuumWord parse_continuum_word(const std::string& spec) {
    if (spec.empty()) throw Error("DegenerateInput", "no continuum word given");
    const std::string text = spec.front() == '{' ? spec : read_file(spec);
    return continuum_word_from_json(Json::parse(text));
}

FamilySpec parse_family(const std::string& spec, double coupling) {
    std::istringstream is(spec);
    std::string kind;
    std::getline(is, kind, ':');
    if (kind == "fullline") return FamilySpec::full_line(coupling);
    std::string narg;
    if (!std::getline(is, narg, ':'))
        throw Error("DegenerateInput", "family " + kind + " needs a block size");
    const int n = std::stoi(narg);
    if (kind == "polymer") return FamilySpec::polymer(n, coupling);
    if (kind == "sieve") {
        std::string rest;
        std::getline(is, rest);
        std::vector<double> b = rest.empty() ? std::vector<double>{} : parse_doubles(rest);
        return FamilySpec::sieve(n, std::move(b), coupling);
    }
    throw Error("DegenerateInput", "unknown family kind " + kind);
}

EnergyWindow parse_window(const std::string& spec) {
    if (spec.empty()) throw Error("DegenerateInput", "no window given");
    std::vector<Interval> parts;
    std::istringstream is(spec);
    std::string part;
    while (std::getline(is, part, ';')) {
        std::vector<double> v = parse_doubles(part);
        if (v.size() != 2) throw Error("DegenerateInput", "window part needs lo,hi");
        parts.push_back({v[0], v[1]});
    }
    return EnergyWindow(std::move(parts));
}

int cmd_bands(const RunConfig& cfg) {
    Word w = parse_word(cfg.word);
    BandOptions opts;
    opts.workers = cfg.workers;
    BandSet bs = band_edges(w, cfg.couplings.at(0), opts);
    write_file(cfg.out + ".csv", bands_to_csv(bs));
    Json summary{{"q", bs.q}, {"total_measure", bs.total_measure()}};
    write_file(cfg.out + ".json", summary.dump(2) + "\n");
    std::cout << cfg.out << ".csv\n" << cfg.out << ".json\n";
    return 0;
}

int cmd_thinspec(const RunConfig& cfg) {
    Word a = parse_word(cfg.word);
    EnergyWindow K = parse_window(cfg.window);
    FamilySpec family = parse_family(cfg.family, cfg.couplings.at(0));

    if (cfg.stages > 0) {
        // window bound doubles as the initial 1/eta
        const double hi = K.bounding().hi;
        if (!(hi > 0.0)) throw Error("DegenerateInput", "stage window needs a positive bound");
        StageOptions sopts;
        sopts.grid_step = cfg.grid_step;
        sopts.cover.depth_cap = cfg.depth_cap;
        std::vector<StageState> states =
            run_stages(a, cfg.eps, cfg.stages, family, cfg.couplings, 1.0 / hi, sopts);
        write_file(cfg.out + "_stages.json", stages_to_json(states).dump(2) + "\n");
        std::cout << cfg.out << "_stages.json\n";
        return 0;
    }

    CoverOptions copts;
    copts.depth_cap = cfg.depth_cap;
    GapCover cover = build_gap_cover(a, K, cfg.eps, cfg.couplings, family, cfg.grid_step, copts);
    std::vector<long> n_list = cfg.n_list;
    if (n_list.empty()) {
        const long base = cover.m() * cover.t;
        n_list = {base, 2 * base, 4 * base, 8 * base};
    }
    std::vector<ThinTrace> traces = decay_experiment(cover, a, K, n_list, cfg.couplings);
    write_file(cfg.out + ".csv", thin_traces_to_csv(traces));
    Json j{{"c0", traces.front().c0},
           {"L_min_estimate", traces.front().L_min_estimate},
           {"cover", cover_to_json(cover)},
           {"traces", thin_traces_to_json(traces)}};
    write_file(cfg.out + ".json", j.dump(2) + "\n");
    std::cout << cfg.out << ".csv\n" << cfg.out << ".json\n";
    return 0;
}

int cmd_dimension(const RunConfig& cfg) {
    if (cfg.input.empty()) throw Error("DegenerateInput", "dimension needs an input file");
    const std::string text = read_file(cfg.input);

    BandSet bs;
    if (text.rfind("band_index", 0) == 0) {
        bs = bands_from_csv(text);
    } else {
        std::vector<StageState> states = stages_from_json(Json::parse(text));
        if (states.empty()) throw Error("DegenerateInput", "no stages in input");
        const StageState& last = states.back();
        if (last.x.site_count() > 4096)
            throw Error("DegenerateInput", "stage word too long to re-solve here");
        bs = band_edges(last.x, cfg.couplings.at(0));
    }
    if (bs.bands.empty()) throw Error("DegenerateInput", "no bands in input");

    EnergyWindow window =
        cfg.window.empty() ? bs.as_window() : parse_window(cfg.window);
    std::vector<double> eps_list = cfg.eps_list;
    if (eps_list.empty()) {
        double len = window.bounding().length();
        for (int i = 1; i <= 8; ++i) eps_list.push_back(len * std::pow(0.5, i + 2));
    }
    DimensionEstimate est = box_dimension_estimate(bs, window, eps_list);
    Json j{{"slope", est.slope}, {"counts", est.counts}, {"eps", eps_list}};
    write_file(cfg.out + ".json", j.dump(2) + "\n");
    std::cout << cfg.out << ".json\n";
    return 0;
}

int cmd_continuum(const RunConfig& cfg) {
    Json results = Json::object();
    if (!cfg.gap_mode.empty()) {
        if (cfg.gap_mode == "repeat") {
            const double lam = continuum_repeat_gap(cfg.gap_a, cfg.gap_n, cfg.gap_e, cfg.lambda_max);
            const double z = static_cast<double>(cfg.gap_n) * cfg.gap_n * cfg.gap_a * cfg.gap_a *
                             (cfg.gap_e - lam);
            results["repeat_gap"] = Json{{"lambda", lam}, {"trace", 2.0 * entire_cos(z)}};
        } else if (cfg.gap_mode == "sieve") {
            ContinuumWord w = parse_continuum_word(cfg.word);
            const double lam =
                continuum_sieve_gap(w.cells.at(0), cfg.gap_a, cfg.gap_e, cfg.lambda_max);
            results["sieve_gap"] = Json{{"lambda", lam}};
        } else {
            throw Error("DegenerateInput", "gap mode must be repeat or sieve");
        }
        write_file(cfg.out + ".json", results.dump(2) + "\n");
        std::cout << cfg.out << ".json\n";
        return 0;
    }

    ContinuumWord w = parse_continuum_word(cfg.word);
    EnergyWindow win = parse_window(cfg.window);
    Interval range = win.bounding();
    int grid = static_cast<int>(range.length() / std::max(cfg.grid_step, 1e-12)) + 2;
    grid = std::min(grid, 2000000);
    std::vector<Interval> bands = continuum_bands(w, range, cfg.couplings.at(0), grid);

    BandSet bs;
    bs.q = static_cast<long>(bands.size());
    bs.bands = bands;
    write_file(cfg.out + ".csv", bands_to_csv(bs));
    results["total_measure"] = bs.total_measure();
    results["band_count"] = bs.bands.size();
    write_file(cfg.out + ".json", results.dump(2) + "\n");
    std::cout << cfg.out << ".csv\n" << cfg.out << ".json\n";
    return 0;
}

void apply_config_json(RunConfig& cfg, const Json& j) {
    auto set_if = [&](const char* key, auto& field) {
        if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
    };
    set_if("subcommand", cfg.subcommand);
    set_if("family", cfg.family);
    set_if("window", cfg.window);
    set_if("couplings", cfg.couplings);
    set_if("n_list", cfg.n_list);
    set_if("stages", cfg.stages);
    set_if("grid_step", cfg.grid_step);
    set_if("eps", cfg.eps);
    set_if("depth_cap", cfg.depth_cap);
    set_if("seed", cfg.seed);
    set_if("out", cfg.out);
    set_if("workers", cfg.workers);
    set_if("input", cfg.input);
    set_if("eps_list", cfg.eps_list);
    set_if("gap_mode", cfg.gap_mode);
    set_if("gap_a", cfg.gap_a);
    set_if("gap_n", cfg.gap_n);
    set_if("gap_e", cfg.gap_e);
    set_if("lambda_max", cfg.lambda_max);
    if (j.contains("word")) {
        const Json& w = j.at("word");
        cfg.word = w.is_string() ? w.get<std::string>() : w.dump();
    }
}

}  // namespace

int main(int argc, char** argv) {
    RunConfig cfg;
    std::string config_path;
    std::string couplings_arg, n_list_arg, eps_list_arg;

    CLI::App app{"limit-periodic spectrum laboratory"};
    app.require_subcommand(0, 1);
    app.add_option("--config", config_path, "JSON file holding the whole run configuration");

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--family", cfg.family, "fullline | sieve:n:b1,b2,... | polymer:n");
        sub->add_option("--word", cfg.word, "word JSON, JSON file, or comma shorthand");
        sub->add_option("--window", cfg.window, "energy window lo,hi[;lo,hi...]");
        sub->add_option("--couplings", couplings_arg, "comma list of nonzero couplings");
        sub->add_option("--n-list", n_list_arg, "comma list of assembly sizes N");
        sub->add_option("--stages", cfg.stages, "number of refinement stages");
        sub->add_option("--grid-step", cfg.grid_step, "energy scan step");
        sub->add_option("--eps", cfg.eps, "perturbation budget");
        sub->add_option("--depth-cap", cfg.depth_cap, "gap search depth cap");
        sub->add_option("--seed", cfg.seed, "seed for randomized sweeps");
        sub->add_option("--out", cfg.out, "output path prefix");
        sub->add_option("--workers", cfg.workers, "parallel worker count (0 = serial)");
    };

    CLI::App* bands = app.add_subcommand("bands", "Floquet band edges of a periodic word");
    add_common(bands);
    CLI::App* thinspec = app.add_subcommand("thinspec", "gap covers, thin words, stage iteration");
    add_common(thinspec);
    CLI::App* dimension = app.add_subcommand("dimension", "box-counting dimension estimate");
    add_common(dimension);
    dimension->add_option("--input", cfg.input, "band CSV or stage JSON");
    dimension->add_option("--eps-list", eps_list_arg, "comma list of box sizes");
    CLI::App* continuum = app.add_subcommand("continuum", "continuum bands and gap searches");
    add_common(continuum);
    continuum->add_option("--gap-mode", cfg.gap_mode, "repeat | sieve");
    continuum->add_option("--gap-a", cfg.gap_a, "cell length");
    continuum->add_option("--gap-n", cfg.gap_n, "repeat count");
    continuum->add_option("--gap-e", cfg.gap_e, "energy probed");
    continuum->add_option("--lambda-max", cfg.lambda_max, "coupling scan bound");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (!config_path.empty()) apply_config_json(cfg, Json::parse(read_file(config_path)));
        for (CLI::App* sub : {bands, thinspec, dimension, continuum})
            if (sub->parsed()) cfg.subcommand = sub->get_name();
        if (!couplings_arg.empty()) cfg.couplings = parse_doubles(couplings_arg);
        if (!eps_list_arg.empty()) cfg.eps_list = parse_doubles(eps_list_arg);
        if (!n_list_arg.empty()) {
            cfg.n_list.clear();
            for (double v : parse_doubles(n_list_arg)) cfg.n_list.push_back(static_cast<long>(v));
        }
        if (cfg.couplings.empty()) throw Error("DegenerateInput", "empty coupling list");

        if (cfg.subcommand == "bands") return cmd_bands(cfg);
        if (cfg.subcommand == "thinspec") return cmd_thinspec(cfg);
        if (cfg.subcommand == "dimension") return cmd_dimension(cfg);
        if (cfg.subcommand == "continuum") return cmd_continuum(cfg);
        std::cerr << "error: no subcommand given (bands|thinspec|dimension|continuum)\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.code() << ": " << e.what() << "\n";
        return e.code() == "DegenerateInput" ? 2 : 3;
    } catch (const Json::exception& e) {
        std::cerr << "error: BadInput: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
