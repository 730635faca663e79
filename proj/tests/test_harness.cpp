#include "mafem/cli.hpp"

#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>

using namespace mafem;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("mafem_harness_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

fs::path write_json(const fs::path& dir, const std::string& text) {
    const fs::path p = dir / "problem.json";
    std::ofstream(p) << text;
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    return {std::istreambuf_iterator<char>(in), {}};
}

int run(std::vector<std::string> args) {
    args.insert(args.begin(), "mafem");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    return cli_main(static_cast<int>(argv.size()), argv.data(), out, err);
}

const std::string quadratic_json = R"({"name": "q", "f": {"constant": 1}, "exact": {"poly": [[0.5, 2, 0], [0.5, 0, 2]]},
                                      "k": 2, "first_level": 1, "levels": 3})";

}  // namespace

TEST(Catalogue, ExactSolutionsAreConsistent) {
    for (const auto& name : catalogue_names()) {
        const ProblemSpec p = catalogue(name);
        ASSERT_TRUE(p.exact) << name;
        if (name == "P-ENVELOPE") continue;  // f = 0 against a piecewise affine envelope
        EXPECT_LE(exact_consistency(p), 1e-8) << name;
    }
    EXPECT_THROW(catalogue("P-NONE"), ProblemError);
}

TEST(Catalogue, EnvelopeTraceMatchesExact) {
    const ProblemSpec p = catalogue("P-ENVELOPE");
    for (int i = 0; i <= 10; ++i) {
        const double t = i / 10.0;
        for (const Point& x : {Point(t, 0), Point(0, t), Point(1, t), Point(t, 1)}) EXPECT_NEAR(p.g(x), p.exact->value(x), 1e-15);
    }
}

TEST(ProblemJson, CatalogueOverride) {
    const ProblemSpec p = problem_from_json(nlohmann::json::parse(R"({"problem": "P-SMOOTH", "k": 3, "levels": 2,
        "regularization": {"delta": 0.05, "epsilon_schedule": [1, 0.5]}})"));
    EXPECT_EQ(p.name, "P-SMOOTH");
    EXPECT_EQ(p.k, 3);
    EXPECT_EQ(p.levels, 2);
    EXPECT_EQ(p.regularization.delta, 0.05);
    EXPECT_EQ(p.regularization.epsilon_schedule, (std::vector<double>{1, 0.5}));
    const Point x(0.3, 0.4);
    EXPECT_EQ(p.f(x), fields::p_smooth_f(x));
}

TEST(ProblemJson, PolynomialFieldsAndPolygon) {
    const ProblemSpec p = problem_from_json(nlohmann::json::parse(
        R"({"polygon": [[0, 0], [2, 0], [1, 1.5]], "f": {"poly": [[3, 1, 1]]}, "g": 2.5, "regularization": {"truncate_M": 7}})"));
    EXPECT_NEAR(p.polygon.area(), 1.5, 1e-15);
    EXPECT_EQ(p.f(Point(0.5, 2.0)), 3.0);
    EXPECT_EQ(p.g(Point(0.1, 0.1)), 2.5);
    EXPECT_FALSE(p.exact);
    EXPECT_EQ(p.regularization.truncate_M, std::vector<double>{7});
}

TEST(ProblemJson, InvalidInputs) {
    const std::vector<std::string> bad{
        R"([1, 2])",
        R"({"g": 1})",
        R"({"f": 1})",
        R"({"f": 1, "g": 1, "k": 7})",
        R"({"f": 1, "g": 1, "polygon": [[0, 0], [1, 1], [1, 0], [0, 1]]})",
        R"({"f": 1, "g": 1, "polygon": [[0, 0], [1, 1]]})",
        R"({"f": {"name": "nope"}, "g": 1})",
        R"({"f": 1, "g": 1, "regularization": {"epsilon_schedule": [1, -1]}})",
        R"({"f": 1, "g": 1, "regularization": {"truncate_M": [0]}})",
        R"({"f": 1, "g": 1, "regularization": {"mollify_radius": -0.1}})",
        R"({"f": 1, "g": 1, "levels": "four"})",
        R"({"problem": "P-NONE"})",
    };
    for (const auto& s : bad) EXPECT_THROW(problem_from_json(nlohmann::json::parse(s)), ProblemError) << s;
}

TEST(ProblemJson, ShippedFilesParse) {
    for (const auto& e : fs::directory_iterator(fs::path(MAFEM_SOURCE_DIR) / "problems")) {
        const ProblemSpec p = problem_from_json(cli::read_json_file(e.path().string()));
        EXPECT_TRUE(p.f && p.g) << e.path();
        EXPECT_NO_THROW(prepare(p)) << e.path();
    }
}

TEST(Format, SeventeenDigitsRoundTrip) {
    for (double v : {0.1, 1.0 / 3.0, 2.0 / 3.0 * 1e-300, 6.02214076e23, -0.0}) EXPECT_EQ(std::stod(format17(v)), v);
    EXPECT_EQ(format17(0.1), "0.10000000000000001");
    const nlohmann::json j{{"a", 1.0 / 3.0}, {"b", {0.1, 2}}, {"c", "text"}, {"d", std::nan("")}};
    const auto back = nlohmann::json::parse(dump17(j));
    EXPECT_EQ(back["a"].get<double>(), 1.0 / 3.0);
    EXPECT_EQ(back["b"][0].get<double>(), 0.1);
    EXPECT_EQ(back["b"][1].get<int>(), 2);
    EXPECT_TRUE(back["d"].is_null());
}

TEST(Study, ExactInSpaceIsSaturated) {
    const ProblemSpec p = problem_from_json(nlohmann::json::parse(quadratic_json));
    const StudyReport r = run_convergence_study(p);
    ASSERT_TRUE(r.complete);
    ASSERT_EQ(r.levels.size(), 3u);
    for (const auto& l : r.levels) {
        EXPECT_LE(l.err_h2_broken, 1e-9);
        EXPECT_LE(l.err_linf_interior, 1e-12);
        EXPECT_FALSE(l.rate_h2);
        for (double m : l.measure_residuals) EXPECT_LE(m, 1e-9);
    }
    EXPECT_FALSE(r.levels[0].saturated);
    EXPECT_TRUE(r.levels[1].saturated);
    EXPECT_FALSE(r.least_squares_rate_h2);
    std::ostringstream csv;
    write_study_csv(csv, r);
    EXPECT_NE(csv.str().find(",saturated\n"), std::string::npos);
}

TEST(Study, SmoothRatesAndMeasureResiduals) {
    ProblemSpec p = catalogue("P-SMOOTH");
    p.first_level = 1;
    p.levels = 3;
    const StudyReport r = run_convergence_study(p);
    ASSERT_TRUE(r.complete);
    EXPECT_FALSE(r.levels[0].rate_h2);
    for (std::size_t i = 1; i < r.levels.size(); ++i) {
        ASSERT_TRUE(r.levels[i].rate_h2);
        EXPECT_GT(*r.levels[i].rate_h2, 0.7);
        EXPECT_LT(r.levels[i].err_linf_interior, r.levels[i - 1].err_linf_interior);
        for (std::size_t b = 0; b < r.levels[i].measure_residuals.size(); ++b)
            EXPECT_LT(r.levels[i].measure_residuals[b], r.levels[i - 1].measure_residuals[b]) << "bump " << b;
    }
    ASSERT_TRUE(r.consistency);
    EXPECT_LE(*r.consistency, 1e-8);
}

TEST(Study, CsvIsDeterministic) {
    const ProblemSpec p = problem_from_json(nlohmann::json::parse(R"({"problem": "P-SMOOTH", "first_level": 1, "levels": 2})"));
    std::ostringstream a, b;
    write_study_csv(a, run_convergence_study(p));
    write_study_csv(b, run_convergence_study(p));
    EXPECT_EQ(a.str(), b.str());
    EXPECT_EQ(a.str().substr(0, a.str().find('\n')), "level,h,dofs,err_h2_broken,err_linf_interior,rate_h2");
}

TEST(Study, FailedLevelLeavesEmptyCells) {
    StudyReport r;
    LevelResult ok;
    ok.level = 2;
    ok.h = 0.25;
    ok.dofs = 81;
    ok.err_h2_broken = 0.5;
    ok.err_linf_interior = 0.01;
    LevelResult bad = ok;
    bad.level = 3;
    bad.failure = "newton: no convergence";
    r.levels = {ok, bad};
    std::ostringstream csv;
    write_study_csv(csv, r);
    EXPECT_EQ(csv.str(), "level,h,dofs,err_h2_broken,err_linf_interior,rate_h2\n2,0.25,81,0.5,0.01,\n3,0.25,81,,,\n");
}

TEST(Study, LeastSquaresRate) {
    EXPECT_NEAR(least_squares_rate({0.5, 0.25, 0.125}, {3.0, 0.75, 0.1875}), 2.0, 1e-14);
    EXPECT_THROW(least_squares_rate({0.5}, {1.0}), std::invalid_argument);
}

TEST(MeasureVerification, UnitDensityIsExact) {
    const ProblemSpec p = problem_from_json(nlohmann::json::parse(quadratic_json));
    auto space = std::make_shared<const FeSpace>(level_mesh(p.polygon, 3), 2);
    const auto [u, rep] = newton_solve(space, p.f, p.g, std::nullopt);
    for (double r : run_measure_verification(p, u)) EXPECT_LE(r, 1e-9);
    EXPECT_THROW(run_measure_verification(u, p.f, {Bump{{1.2, 0.5}, 0.1, 1.0}}), MeasureError);
    EXPECT_THROW(run_measure_verification(u, p.f, {Bump{{0.9, 0.5}, 0.2, 1.0}}), MeasureError);
}

TEST(MeasureVerification, BumpsStayInsideCompact) {
    for (const auto& name : catalogue_names()) {
        const ProblemSpec p = catalogue(name);
        const ConvexPolygon k = measurement_compact(p);
        for (const Bump& b : default_bumps(p)) EXPECT_GE(k.inner_distance(b.center), b.radius) << name;
    }
}

TEST(Cli, SolveWritesReport) {
    const fs::path dir = scratch("solve");
    const fs::path prob = write_json(dir, quadratic_json);
    ASSERT_EQ(run({"solve", "--problem", prob.string(), "--k", "2", "--h", "0.25", "--out", (dir / "run").string()}), cli::ok);
    const auto report = nlohmann::json::parse(slurp(dir / "run" / "report.json"));
    EXPECT_TRUE(report["solve"]["converged"].get<bool>());
    EXPECT_LE(report["errors"]["linf"].get<double>(), 1e-9);
    EXPECT_TRUE(fs::exists(dir / "run" / "solution.csv"));
    const FeFunction u = read_fefunction((dir / "run" / "solution.txt").string());
    EXPECT_EQ(u.space().degree(), 2);
}

TEST(Cli, StudyWritesCsv) {
    const fs::path dir = scratch("study");
    const fs::path prob = write_json(dir, quadratic_json);
    ASSERT_EQ(run({"study", "--problem", prob.string(), "--levels", "2", "--out", dir.string()}), cli::ok);
    const std::string csv = slurp(dir / "study.csv");
    EXPECT_EQ(csv.substr(0, csv.find('\n')), study_csv_header);
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 3);
}

TEST(Cli, MeasureAndCheckMesh) {
    const fs::path dir = scratch("measure");
    const fs::path prob = write_json(dir, quadratic_json);
    ASSERT_EQ(run({"measure", "--problem", prob.string(), "--levels", "1", "--out", dir.string()}), cli::ok);
    EXPECT_TRUE(fs::exists(dir / "measure.csv"));
    ASSERT_EQ(run({"check-mesh", "--problem", prob.string(), "--level", "2", "--out", dir.string()}), cli::ok);
    const auto m = nlohmann::json::parse(slurp(dir / "mesh_report.json"));
    EXPECT_TRUE(m["conforming"].get<bool>());
    EXPECT_NEAR(m["area"].get<double>(), 1.0, 1e-14);
}

TEST(Cli, InvalidInputExitsTwo) {
    const fs::path dir = scratch("invalid");
    EXPECT_EQ(run({"solve", "--problem", (dir / "missing.json").string()}), cli::invalid_input);
    std::ofstream(dir / "broken.json") << "{ not json";
    EXPECT_EQ(run({"solve", "--problem", (dir / "broken.json").string()}), cli::invalid_input);
    const fs::path prob = write_json(dir, quadratic_json);
    EXPECT_EQ(run({"solve", "--problem", prob.string(), "--k", "9"}), cli::invalid_input);
    EXPECT_EQ(run({"solve", "--problem", prob.string(), "--h", "-1"}), cli::invalid_input);
    EXPECT_EQ(run({"solve", "--problem", prob.string(), "--method", "magic"}), cli::invalid_input);
    EXPECT_EQ(run({"frobnicate"}), cli::invalid_input);
    EXPECT_EQ(run({}), cli::invalid_input);
    // f = 0 needs a continuation schedule
    const fs::path flat = dir / "flat.json";
    std::ofstream(flat) << R"({"f": 0, "g": {"name": "p_envelope"}})";
    EXPECT_EQ(run({"solve", "--problem", flat.string(), "--level", "1", "--out", dir.string()}), cli::invalid_input);
}

TEST(Cli, SolverFailureExitsOne) {
    const fs::path dir = scratch("failure");
    const fs::path prob = write_json(dir, R"({"problem": "P-SMOOTH"})");
    // far too small a pseudo-time parameter: the march blows up
    EXPECT_EQ(run({"solve", "--problem", prob.string(), "--level", "2", "--method", "time_march", "--nu", "0.05", "--out", dir.string()}),
              cli::solver_failure);
    const auto report = nlohmann::json::parse(slurp(dir / "report.json"));
    EXPECT_TRUE(report.contains("failure"));
}

TEST(Cli, ExecutableExitCodes) {
    const fs::path dir = scratch("exe");
    const fs::path prob = write_json(dir, quadratic_json);
    auto status = [](const std::string& cmd) {
        const int s = std::system((cmd + " > /dev/null 2>&1").c_str());
        return WIFEXITED(s) ? WEXITSTATUS(s) : -1;
    };
    const std::string exe = MAFEM_CLI_PATH;
    EXPECT_EQ(status(exe + " solve --problem " + prob.string() + " --level 1 --out " + dir.string()), 0);
    EXPECT_TRUE(fs::exists(dir / "report.json"));
    EXPECT_EQ(status(exe + " solve --problem " + (dir / "nope.json").string()), 2);
    EXPECT_EQ(status(exe + " --help"), 0);
}
