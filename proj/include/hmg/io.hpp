// Case ingestion and result emission. Cases are JSON documents referencing
// per-period CSV series (one row per period, one column per scenario); all
// emitted tables are byte-deterministic with 9 significant digits.
#pragma once

#include <hmg/coalition.hpp>

#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace hmg {

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RunManifest {
    std::string case_path;
    std::string mode;              // validate | clear | bilevel | sweep
    std::string structure_filter;  // label or empty
    int K = 5;
    double tol = 1e-6;
    unsigned seed = 0;
    std::string out_dir;
    std::string version = "hmgctl 1.0.0";
    std::string soc_convention = "physical";
    bool tes_loss = false;
};

namespace detail {

inline std::string format9(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

inline std::pair<int, int> line_col(const std::string& text, size_t byte) {
    int line = 1, col = 1;
    for (size_t i = 0; i < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return {line, col};
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError(path + ": cannot open");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// One CSV series: header "w0,w1,...", then T rows of numbers. Returns [W][T].
inline std::vector<std::vector<double>> load_series(const std::string& path, int W, int T) {
    std::string text = read_file(path);
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw ParseError(path + ": empty series file");
    int cols = 1;
    for (char c : line) cols += c == ',';
    if (cols != W)
        throw ParseError(path + ": expected " + std::to_string(W) + " scenario columns, found " +
                         std::to_string(cols));
    std::vector<std::vector<double>> s(W, std::vector<double>(T));
    int t = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (t >= T) throw ParseError(path + ": more than " + std::to_string(T) + " rows");
        std::istringstream row(line);
        std::string cell;
        for (int w = 0; w < W; ++w) {
            if (!std::getline(row, cell, ','))
                throw ParseError(path + ": short row at period " + std::to_string(t));
            try {
                size_t used = 0;
                s[w][t] = std::stod(cell, &used);
                while (used < cell.size() && std::isspace(static_cast<unsigned char>(cell[used])))
                    ++used;
                if (used != cell.size()) throw std::invalid_argument("");
            } catch (const std::exception&) {
                throw ParseError(path + ": bad number '" + cell + "' at period " + std::to_string(t));
            }
        }
        ++t;
    }
    if (t != T)
        throw ParseError(path + ": length mismatch, expected " + std::to_string(T) + " rows, found " +
                         std::to_string(t));
    return s;
}

inline void check_keys(const nlohmann::json& obj, const std::vector<std::string>& known,
                       const std::string& where, bool strict, std::vector<std::string>* warnings) {
    for (const auto& [key, value] : obj.items()) {
        bool ok = false;
        for (const auto& k : known) ok = ok || k == key;
        if (ok) continue;
        std::string msg = where + ": unknown key '" + key + "'";
        if (strict) throw ParseError(msg);
        if (warnings) warnings->push_back(msg);
    }
}

inline std::string series_path(const std::string& case_path, const std::string& ref) {
    namespace fs = std::filesystem;
    fs::path p(ref);
    if (p.is_absolute()) return ref;
    return (fs::path(case_path).parent_path() / p).string();
}

}  // namespace detail

inline CaseDefinition load_case(const std::string& path, bool strict = true,
                                std::vector<std::string>* warnings = nullptr) {
    std::string text = detail::read_file(path);
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        auto [line, col] = detail::line_col(text, e.byte > 0 ? e.byte - 1 : 0);
        throw ParseError(path + ":" + std::to_string(line) + ":" + std::to_string(col) + ": " +
                         e.what());
    }
    detail::check_keys(doc, {"T", "step", "scenarios", "hmgs", "retailers", "bid_levels", "flags"},
                       path, strict, warnings);

    CaseDefinition def;
    def.grid.T = doc.at("T").get<int>();
    def.grid.step = doc.value("step", 1.0);

    const auto& sc = doc.at("scenarios");
    detail::check_keys(sc, {"weights", "mcp_pred"}, path + ":scenarios", strict, warnings);
    def.scenarios.weights = sc.at("weights").get<std::vector<double>>();
    def.scenarios.W = static_cast<int>(def.scenarios.weights.size());
    def.scenarios.mcp_pred = detail::load_series(
        detail::series_path(path, sc.at("mcp_pred").get<std::string>()), def.scenarios.W, def.grid.T);

    for (const auto& jh : doc.at("hmgs")) {
        detail::check_keys(jh, {"id", "eta", "load_e", "load_h", "devices"}, path + ":hmgs", strict,
                           warnings);
        HMGSpec h;
        h.id = jh.at("id").get<std::string>();
        h.eta = jh.value("eta", 1.0);
        h.load_e = detail::load_series(detail::series_path(path, jh.at("load_e").get<std::string>()),
                                       def.scenarios.W, def.grid.T);
        h.load_h = detail::load_series(detail::series_path(path, jh.at("load_h").get<std::string>()),
                                       def.scenarios.W, def.grid.T);
        for (const auto& jd : jh.value("devices", nlohmann::json::array())) {
            detail::check_keys(jd,
                               {"kind", "count", "p_min", "p_max", "p_max_h", "zeta_e", "zeta_h",
                                "zeta_prime_e", "zeta_eb", "cop", "n_fuel", "fuel_price", "soc_min",
                                "soc_max", "soc_ini", "soc_end", "zeta_tes", "availability"},
                               path + ":" + h.id + ".devices", strict, warnings);
            DeviceSpec d;
            auto kind = device_kind_from_name(jd.at("kind").get<std::string>());
            if (!kind)
                throw ParseError(path + ": unknown device kind '" +
                                 jd.at("kind").get<std::string>() + "'");
            d.kind = *kind;
            d.p_min = jd.value("p_min", 0.0);
            d.p_max = jd.value("p_max", 0.0);
            d.p_max_h = jd.value("p_max_h", 0.0);
            d.zeta_e = jd.value("zeta_e", 0.0);
            d.zeta_h = jd.value("zeta_h", 0.0);
            d.zeta_prime_e = jd.value("zeta_prime_e", 0.0);
            d.zeta_eb = jd.value("zeta_eb", 0.0);
            d.cop = jd.value("cop", 0.0);
            d.n_fuel = jd.value("n_fuel", 0.0);
            d.fuel_price = jd.value("fuel_price", 0.0);
            d.soc_min = jd.value("soc_min", 0.0);
            d.soc_max = jd.value("soc_max", 1.0);
            d.soc_ini = jd.value("soc_ini", 0.0);
            d.soc_end = jd.value("soc_end", 0.0);
            d.zeta_tes = jd.value("zeta_tes", 1.0);
            if (jd.contains("availability"))
                d.availability =
                    detail::load_series(detail::series_path(path, jd.at("availability").get<std::string>()),
                                        def.scenarios.W, def.grid.T);
            const int count = jd.value("count", 1);  // "2x150" banks flatten to duplicates
            for (int c = 0; c < count; ++c) h.devices.push_back(d);
        }
        def.hmgs.push_back(std::move(h));
    }

    for (const auto& jr : doc.value("retailers", nlohmann::json::array())) {
        detail::check_keys(jr, {"id", "sell_min", "sell_max", "buy_min", "buy_max", "capacity"},
                           path + ":retailers", strict, warnings);
        RetailerSpec r;
        r.id = jr.at("id").get<std::string>();
        r.sell_min = jr.value("sell_min", 0.0);
        r.sell_max = jr.value("sell_max", 0.0);
        r.buy_min = jr.value("buy_min", 0.0);
        r.buy_max = jr.value("buy_max", 0.0);
        r.capacity = jr.value("capacity", 0.0);
        def.retailers.push_back(std::move(r));
    }

    def.bid_levels = doc.value("bid_levels", 5);
    if (doc.contains("flags")) {
        const auto& jf = doc.at("flags");
        detail::check_keys(jf, {"soc_convention", "tes_loss", "demand_pairing_literal", "tolerance"},
                           path + ":flags", strict, warnings);
        def.flags.soc_physical = jf.value("soc_convention", std::string("physical")) != "literal";
        def.flags.tes_loss = jf.value("tes_loss", false);
        def.flags.demand_pairing_literal = jf.value("demand_pairing_literal", false);
        def.flags.tolerance = jf.value("tolerance", 1e-6);
    }
    return def;
}

// Writes a case back out as JSON + CSV series (used for round-trip checks and
// for shipping generated cases).
inline void save_case(const CaseDefinition& def, const std::string& dir, const std::string& name) {
    namespace fs = std::filesystem;
    fs::create_directories(fs::path(dir) / "series");
    auto write_series = [&](const std::string& file, const std::vector<std::vector<double>>& s) {
        std::ofstream out(fs::path(dir) / "series" / file, std::ios::binary);
        for (int w = 0; w < static_cast<int>(s.size()); ++w) out << (w ? ",w" : "w") << w;
        out << "\n";
        for (size_t t = 0; t < s.at(0).size(); ++t) {
            for (size_t w = 0; w < s.size(); ++w) out << (w ? "," : "") << detail::format9(s[w][t]);
            out << "\n";
        }
        return "series/" + file;
    };

    nlohmann::ordered_json doc;
    doc["T"] = def.grid.T;
    doc["step"] = def.grid.step;
    doc["scenarios"]["weights"] = def.scenarios.weights;
    doc["scenarios"]["mcp_pred"] = write_series("mcp_pred.csv", def.scenarios.mcp_pred);
    doc["hmgs"] = nlohmann::ordered_json::array();
    for (const auto& h : def.hmgs) {
        nlohmann::ordered_json jh;
        jh["id"] = h.id;
        jh["eta"] = h.eta;
        jh["load_e"] = write_series(h.id + "_load_e.csv", h.load_e);
        jh["load_h"] = write_series(h.id + "_load_h.csv", h.load_h);
        jh["devices"] = nlohmann::ordered_json::array();
        for (size_t j = 0; j < h.devices.size(); ++j) {
            const auto& d = h.devices[j];
            nlohmann::ordered_json jd;
            jd["kind"] = device_kind_name(d.kind);
            if (d.p_min != 0.0) jd["p_min"] = d.p_min;
            jd["p_max"] = d.p_max;
            if (d.p_max_h != 0.0) jd["p_max_h"] = d.p_max_h;
            if (d.zeta_e != 0.0) jd["zeta_e"] = d.zeta_e;
            if (d.zeta_h != 0.0) jd["zeta_h"] = d.zeta_h;
            if (d.zeta_prime_e != 0.0) jd["zeta_prime_e"] = d.zeta_prime_e;
            if (d.zeta_eb != 0.0) jd["zeta_eb"] = d.zeta_eb;
            if (d.cop != 0.0) jd["cop"] = d.cop;
            if (d.n_fuel != 0.0) jd["n_fuel"] = d.n_fuel;
            if (d.fuel_price != 0.0) jd["fuel_price"] = d.fuel_price;
            if (d.kind == DeviceKind::ES || d.kind == DeviceKind::TES) {
                jd["soc_min"] = d.soc_min;
                jd["soc_max"] = d.soc_max;
                jd["soc_ini"] = d.soc_ini;
                jd["soc_end"] = d.soc_end;
                if (d.kind == DeviceKind::TES) jd["zeta_tes"] = d.zeta_tes;
            }
            if (!d.availability.empty())
                jd["availability"] = write_series(
                    h.id + "_" + device_kind_name(d.kind) + std::to_string(j) + ".csv", d.availability);
            jh["devices"].push_back(std::move(jd));
        }
        doc["hmgs"].push_back(std::move(jh));
    }
    doc["retailers"] = nlohmann::ordered_json::array();
    for (const auto& r : def.retailers) {
        nlohmann::ordered_json jr;
        jr["id"] = r.id;
        jr["sell_min"] = r.sell_min;
        jr["sell_max"] = r.sell_max;
        jr["buy_min"] = r.buy_min;
        jr["buy_max"] = r.buy_max;
        jr["capacity"] = r.capacity;
        doc["retailers"].push_back(std::move(jr));
    }
    doc["bid_levels"] = def.bid_levels;
    doc["flags"]["soc_convention"] = def.flags.soc_physical ? "physical" : "literal";
    doc["flags"]["tes_loss"] = def.flags.tes_loss;
    doc["flags"]["demand_pairing_literal"] = def.flags.demand_pairing_literal;
    doc["flags"]["tolerance"] = def.flags.tolerance;

    std::ofstream out(fs::path(dir) / name, std::ios::binary);
    out << doc.dump(2) << "\n";
}

// A cleared (structure, scenario) pair decorated for export.
struct ExportOutcome {
    std::string structure;
    int w = 0;
    const ClearingProblem* problem = nullptr;  // optional, enables schedule/kkt export
    MarketOutcome outcome;
};

inline void emit_report(const std::vector<ExportOutcome>& outcomes, const SweepResult* sweep,
                        const RunManifest& manifest, const std::string& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    auto open = [&](const std::string& name) {
        std::ofstream out(fs::path(dir) / name, std::ios::binary);
        if (!out) throw std::runtime_error(dir + "/" + name + ": cannot open for writing");
        return out;
    };
    using detail::format9;

    {
        auto f = open("mcp.csv");
        f << "structure,w,t,mcp_e,mcp_h\n";
        for (const auto& eo : outcomes)
            for (size_t t = 0; t < eo.outcome.mcp_e.size(); ++t)
                f << eo.structure << "," << eo.w << "," << t << "," << format9(eo.outcome.mcp_e[t])
                  << "," << format9(eo.outcome.mcp_h[t]) << "\n";
    }
    {
        auto f = open("schedule.csv");
        f << "structure,w,variable,value\n";
        for (const auto& eo : outcomes) {
            if (!eo.problem || eo.outcome.status != SolveStatus::optimal) continue;
            for (size_t j = 0; j < eo.problem->vars.size(); ++j)
                f << eo.structure << "," << eo.w << "," << eo.problem->vars[j].name << ","
                  << format9(eo.outcome.solution.x[j]) << "\n";
        }
    }
    {
        auto f = open("profits.csv");
        f << "structure,w,player,profit\n";
        for (const auto& eo : outcomes)
            for (const auto& [id, v] : eo.outcome.profit)
                f << eo.structure << "," << eo.w << "," << id << "," << format9(v) << "\n";
    }
    {
        auto f = open("kkt.csv");
        f << "structure,w,eq,index,residual,pass\n";
        for (const auto& eo : outcomes) {
            const auto& k = eo.outcome.kkt;
            if (!k.evaluated) continue;
            for (const auto& [eq, label, res] : k.entries)
                f << eo.structure << "," << eo.w << "," << eq << "," << label << "," << format9(res)
                  << "," << (res <= manifest.tol ? 1 : 0) << "\n";
        }
    }
    {
        auto f = open("sweep.csv");
        f << "structure,hmg,expected_income,avg_mcp_e,avg_mcp_h,equilibrium_flag,deviation_margin\n";
        if (sweep)
            for (const auto& r : sweep->rows)
                f << r.structure << "," << r.hmg << "," << format9(r.expected_income) << ","
                  << format9(r.avg_mcp_e) << "," << format9(r.avg_mcp_h) << ","
                  << (r.equilibrium ? 1 : 0) << "," << format9(r.deviation_margin) << "\n";
    }
    {
        auto f = open("dr_stats.csv");
        f << "structure,hmg,shift_share,dr_plus_periods,dr_minus_periods\n";
        if (sweep)
            for (const auto& [label, per_hmg] : sweep->dr)
                for (const auto& [id, st] : per_hmg)
                    f << label << "," << id << "," << format9(st.shift_share) << ","
                      << format9(st.dr_plus_share) << "," << format9(st.dr_minus_share) << "\n";
    }
    {
        nlohmann::ordered_json j;
        j["case"] = manifest.case_path;
        j["mode"] = manifest.mode;
        j["structure"] = manifest.structure_filter;
        j["K"] = manifest.K;
        j["tol"] = manifest.tol;
        j["seed"] = manifest.seed;
        j["out"] = manifest.out_dir;
        j["version"] = manifest.version;
        j["soc_convention"] = manifest.soc_convention;
        j["tes_loss"] = manifest.tes_loss;
        auto f = open("manifest.json");
        f << j.dump(2) << "\n";
    }
}

}  // namespace hmg
