#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include "rlab/io.hpp"

using namespace rlab;

namespace {

// Minimal CSV reader honoring quoted cells, for the flattening round trip.
std::vector<std::vector<std::string>> read_csv(const std::string& body) {
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string cell;
    bool quoted = false;
    for (std::size_t i = 0; i < body.size(); ++i) {
        char c = body[i];
        if (quoted) {
            if (c == '"' && i + 1 < body.size() && body[i + 1] == '"') {
                cell += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cell += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            row.push_back(cell);
            cell.clear();
        } else if (c == '\n') {
            row.push_back(cell);
            cell.clear();
            rows.push_back(row);
            row.clear();
        } else {
            cell += c;
        }
    }
    if (!cell.empty() || !row.empty()) {
        row.push_back(cell);
        rows.push_back(row);
    }
    return rows;
}

} // namespace

TEST_CASE("sequence records round-trip exactly", "[io]") {
    double tail = 1.0 - (0.1 + 1.0 / 3 + 0.25);
    auto f = make_sequence({{1, 0.1}, {3, 1.0 / 3}, {7, 0.25}}, tail, true);
    std::string text = sequence_to_text(f);
    auto g = sequence_from_json(parse_json_text(text, "test"));
    REQUIRE(g.terms.size() == f.terms.size());
    for (std::size_t i = 0; i < f.terms.size(); ++i) {
        CHECK(g.terms[i].first == f.terms[i].first);
        CHECK(g.terms[i].second == f.terms[i].second);
    }
    CHECK(g.tail_mass == f.tail_mass);
    CHECK(g.normalized == f.normalized);
    CHECK(sequence_to_text(g) == text);

    // Handwritten records parse, with weights as numbers or decimal strings.
    auto h = sequence_from_json(parse_json_text(
        R"({"mode":"integer","terms":[[2,"0.5"],[1,0.5]],"tail_mass":0,"normalized":true})", "test"));
    REQUIRE(h.terms.size() == 2);
    CHECK(h.terms[0].first == 1);
    CHECK(h.terms[1].second == 0.5);
}

TEST_CASE("sequence records reject malformed input", "[io]") {
    auto parse = [](const std::string& s) { return sequence_from_json(parse_json_text(s, "test")); };
    CHECK_THROWS_AS(parse(R"({"terms":[],"tail_mass":0,"normalized":false})"), format_error);
    CHECK_THROWS_AS(parse(R"({"mode":"real","terms":[],"tail_mass":0,"normalized":false})"), format_error);
    CHECK_THROWS_AS(parse(R"({"mode":"integer","terms":5,"tail_mass":0,"normalized":false})"), format_error);
    CHECK_THROWS_AS(parse(R"({"mode":"integer","terms":[[1]],"tail_mass":0,"normalized":false})"), format_error);
    CHECK_THROWS_AS(parse(R"({"mode":"integer","terms":[[1.5,0.5]],"tail_mass":0,"normalized":false})"),
                    format_error);
    CHECK_THROWS_AS(parse(R"({"mode":"integer","terms":[[1,0.5]],"tail_mass":0,"normalized":"yes"})"),
                    format_error);
    CHECK_THROWS_AS(parse(R"({"mode":"integer","terms":[[1,-0.5]],"tail_mass":0,"normalized":false})"),
                    precondition_error);
    CHECK_THROWS_AS(parse(R"({"mode":"integer","terms":[[1,0.5],[1,0.1]],"tail_mass":0,"normalized":false})"),
                    precondition_error);
    CHECK_THROWS_AS(parse_json_text("{not json", "bad.json"), format_error);
}

TEST_CASE("polynomial records round-trip in both modes", "[io]") {
    ExpPolynomial<double> p{{{1.0, 0.4}, {2.5, 0.6}}};
    std::string text = sequence_to_text(p);
    auto q = polynomial_from_json<double>(parse_json_text(text, "test"));
    REQUIRE(q.terms.size() == 2);
    CHECK(q.terms[0].freq == 1.0);
    CHECK(q.terms[1].freq == 2.5);
    CHECK(q.terms[1].weight == 0.6);
    CHECK(sequence_to_text(q) == text);

    // Integer-mode records load as polynomials too.
    auto r = polynomial_from_json<double>(parse_json_text(
        R"({"mode":"integer","terms":[[1,0.5],[2,0.5]],"tail_mass":0,"normalized":true})", "test"));
    CHECK(r.degree() == 2.0);

    // Polynomials carry no tail.
    CHECK_THROWS_AS(polynomial_from_json<double>(parse_json_text(
                        R"({"mode":"integer","terms":[[1,0.5]],"tail_mass":0.5,"normalized":true})", "test")),
                    format_error);

    // Wide-precision values survive the quoted decimal form bit-exactly.
    ExpPolynomial<BigFloat> wp;
    wp.terms.push_back({BigFloat(1) / BigFloat(3), BigFloat(2) / BigFloat(7)});
    wp.terms.push_back({pow(BigFloat(2), BigFloat(300)), BigFloat("0.125")});
    std::string wide = sequence_to_text(wp);
    auto wq = polynomial_from_json<BigFloat>(parse_json_text(wide, "test"));
    REQUIRE(wq.terms.size() == 2);
    CHECK(wq.terms[0].freq == wp.terms[0].freq);
    CHECK(wq.terms[0].weight == wp.terms[0].weight);
    CHECK(wq.terms[1].freq == wp.terms[1].freq);
    CHECK(sequence_to_text(wq) == wide);
}

TEST_CASE("bernstein records round-trip", "[io]") {
    DiscreteBernstein<double> phi;
    phi.c = 0.25;
    phi.atoms = {{1.0, 0.3}, {2.5, 0.45}};
    std::string text = bernstein_to_text(phi);
    auto back = bernstein_from_json<double>(parse_json_text(text, "test"));
    CHECK(back.c == phi.c);
    REQUIRE(back.atoms.size() == 2);
    CHECK(back.atoms[1].t == 2.5);
    CHECK(back.atoms[1].mass == 0.45);
    CHECK(bernstein_to_text(back) == text);

    auto parse = [](const std::string& s) { return bernstein_from_json<double>(parse_json_text(s, "test")); };
    CHECK_THROWS_AS(parse(R"({"atoms":[]})"), format_error);
    CHECK_THROWS_AS(parse(R"({"c":0,"atoms":[[1]]})"), format_error);
    CHECK_THROWS_AS(parse(R"({"c":0,"atoms":[[-1,0.5]]})"), precondition_error);
    CHECK_THROWS_AS(parse(R"({"c":-0.5,"atoms":[]})"), precondition_error);
}

TEST_CASE("construction traces replay from the document alone", "[io]") {
    ExpPolynomial<double> f0{{{1.0, 1.0}}};
    PhiSpec spec = parse_phi_spec("theta^-0.25");
    auto run = iterative_counterexample<double>(f0, 0.5, 1.0, compile_phi<double>(spec), 0.0, 1);
    REQUIRE(run.status == BuildStatus::complete);
    REQUIRE(run.trace.stages.size() == 1);

    auto doc = make_trace_document(f0, run, spec, 0.5, 1.0, 0.0);
    std::string text = trace_to_text(doc);
    auto back = trace_from_json<double>(parse_json_text(text, "test"));
    CHECK(trace_to_text(back) == text);
    CHECK(back.phi_text == "theta^-0.25");
    CHECK(back.status == "complete");
    REQUIRE(back.trace.stages.size() == 1);
    CHECK(back.trace.stages[0].window.theta_m == run.trace.stages[0].window.theta_m);
    CHECK(back.trace.final.terms.size() == run.trace.final.terms.size());

    auto reports = replay_trace(back);
    REQUIRE(reports.size() == 6);
    for (const auto& r : reports) {
        INFO(r.theorem_tag);
        CHECK(r.satisfied);
    }

    // Corrupting the schedule breaks the stage check on replay.
    auto bad = back;
    bad.trace.schedule[0] = bad.trace.schedule[0] / 1e6;
    auto broken = replay_trace(bad);
    bool any_failed = false;
    for (const auto& r : broken) any_failed = any_failed || !r.satisfied;
    CHECK(any_failed);

    // Corrupting a stage polynomial's mass breaks preservation.
    auto bad2 = back;
    bad2.trace.stages[0].poly.terms[0].weight += 1e-6;
    broken = replay_trace(bad2);
    bool mass_failed = false;
    for (const auto& r : broken)
        if (r.theorem_tag == "mass-preservation") mass_failed = !r.satisfied;
    CHECK(mass_failed);
}

TEST_CASE("trace documents gate precision and foreign content", "[io]") {
    ExpPolynomial<double> f0{{{1.0, 1.0}}};
    PhiSpec spec = parse_phi_spec("theta^-0.25");
    auto run = iterative_counterexample<double>(f0, 0.5, 1.0, compile_phi<double>(spec), 0.0, 0);
    auto doc = make_trace_document(f0, run, spec, 0.5, 1.0, 0.0);

    // Zero-stage documents replay trivially green.
    auto reports = replay_trace(doc);
    for (const auto& r : reports) CHECK(r.satisfied);

    doc.precision_bits = 256;
    std::string text = trace_to_text(doc);
    CHECK_THROWS_AS(trace_from_json<double>(parse_json_text(text, "test")), format_error);

    CHECK_THROWS_AS(trace_from_json<double>(parse_json_text(R"({"kind":"report"})", "test")), format_error);

    auto foreign = make_trace_document(f0, run, spec, 0.5, 1.0, 0.0);
    foreign.mode = "flat-point";
    CHECK_THROWS_AS(replay_trace(foreign), format_error);

    // Extended precision reaches a second stage far below binary64 range;
    // the quoted decimal strings must reload it bit-exactly for replay.
    PrecisionGuard guard(512);
    ExpPolynomial<BigFloat> w0{{{BigFloat(1), BigFloat(1)}}};
    auto wrun = iterative_counterexample<BigFloat>(w0, 0.5, 1.0, compile_phi<BigFloat>(spec), 0.0, 2);
    REQUIRE(wrun.status == BuildStatus::complete);
    REQUIRE(wrun.trace.stages.size() == 2);
    auto wdoc = make_trace_document(w0, wrun, spec, 0.5, 1.0, 0.0);
    std::string wtext = trace_to_text(wdoc);
    auto wback = trace_from_json<BigFloat>(parse_json_text(wtext, "test"));
    CHECK(trace_to_text(wback) == wtext);
    CHECK(wback.trace.stages[1].window.theta_m == wrun.trace.stages[1].window.theta_m);
    CHECK(to_double(wback.trace.stages[1].window.theta_m) < 1e-50);
    for (const auto& r : replay_trace(wback)) {
        INFO(r.theorem_tag);
        CHECK(r.satisfied);
    }
}

TEST_CASE("run configuration parses with defaults and validates", "[io]") {
    auto c = runconfig_from_json(parse_json_text("{}", "test"));
    CHECK(c.precision_bits == 53);
    CHECK(c.format == "json");
    CHECK(c.grid_points == 10000);
    CHECK(c.tolerances.at("cert_slack") == 1e-12);

    std::string text = runconfig_to_text(c);
    auto again = runconfig_from_json(parse_json_text(text, "test"));
    CHECK(runconfig_to_text(again) == text);

    auto wide = runconfig_from_json(parse_json_text(
        R"({"precision":256,"format":"csv","seed":7,"tolerances":{"root_rel":1e-10}})", "test"));
    CHECK(wide.precision_bits == 256);
    CHECK(wide.format == "csv");
    CHECK(wide.seed == 7);
    CHECK(wide.tolerances.at("root_rel") == 1e-10);
    CHECK(wide.tolerances.at("cert_slack") == 1e-12);

    auto parse = [](const std::string& s) { return runconfig_from_json(parse_json_text(s, "test")); };
    CHECK_THROWS_AS(parse(R"({"format":"xml"})"), precondition_error);
    CHECK_THROWS_AS(parse(R"({"precision":"quad"})"), format_error);
    CHECK_THROWS_AS(parse(R"({"tolerances":{"cert_slack":0}})"), precondition_error);
    CHECK_THROWS_AS(parse(R"({"precision":8})"), precondition_error);
    CHECK_THROWS_AS(parse(R"([1,2])"), format_error);
}

TEST_CASE("file helpers surface failures with paths", "[io]") {
    std::string path = "/tmp/rlab_io_test.json";
    write_text_file(path, R"({"mode":"integer","terms":[[1,1.0]],"tail_mass":0,"normalized":true})");
    auto f = sequence_from_json(load_json_file(path));
    CHECK(f.terms.size() == 1);
    std::remove(path.c_str());

    try {
        load_json_file("/tmp/rlab_io_missing_file.json");
        FAIL("expected format_error");
    } catch (const format_error& e) {
        CHECK(std::string(e.what()).find("rlab_io_missing_file") != std::string::npos);
    }

    write_text_file(path, "{broken");
    CHECK_THROWS_AS(load_json_file(path), format_error);
    std::remove(path.c_str());
}

TEST_CASE("report flattening preserves every numeric field", "[io]") {
    auto r1 = check_le("littlewood-superlevel", 0.3, 0.5, 1e-12).with_input("eps", 0.01);
    auto r2 = check_le("layer-cake", 1.0 / 3, 1.0).with_input("theta", 0.25).with_meta("note", "a,b");
    std::vector<VerificationReport> rs{r1, r2};

    // JSON side: the emitted document parses and carries the doubles exactly.
    auto j = parse_json_text(to_json(rs), "report");
    REQUIRE(j.is_array());
    REQUIRE(j.size() == 2);
    CHECK(j[0].at("theorem_tag") == "littlewood-superlevel");
    CHECK(j[0].at("lhs").get<double>() == 0.3);
    CHECK(j[1].at("lhs").get<double>() == 1.0 / 3);
    CHECK(j[0].at("inputs").at("eps") == format_real(0.01));
    CHECK(j[1].at("meta").at("note") == "a,b");
    CHECK(j[0].at("satisfied").get<bool>());

    // CSV side: union of keys becomes columns; every numeric field survives.
    auto rows = read_csv(to_csv(rs));
    REQUIRE(rows.size() == 3);
    const auto& header = rows[0];
    auto col = [&](const std::string& name) {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return i;
        FAIL("missing column " + name);
        return std::size_t(0);
    };
    CHECK(rows[1][col("theorem_tag")] == "littlewood-superlevel");
    CHECK(std::stod(rows[1][col("lhs")]) == 0.3);
    CHECK(std::stod(rows[1][col("rhs")]) == 0.5);
    CHECK(std::stod(rows[1][col("error_estimate")]) == 1e-12);
    CHECK(std::stod(rows[1][col("input.eps")]) == 0.01);
    CHECK(rows[1][col("input.theta")].empty());
    CHECK(std::stod(rows[2][col("input.theta")]) == 0.25);
    CHECK(std::stod(rows[2][col("lhs")]) == 1.0 / 3);
    CHECK(rows[2][col("meta.note")] == "a,b");
    CHECK(rows[1][col("satisfied")] == "true");
}
