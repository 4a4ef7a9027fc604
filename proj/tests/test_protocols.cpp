#include <gtest/gtest.h>

#include <string>

#include "hopfid/protocols.hpp"
#include "oracles.hpp"

using namespace hopfid;

namespace {

const std::string kStab4Entry = R"({
  "family": "jansen", "name": "stab4", "r": 4, "variable": "werner",
  "f_num": [0, 0, 2, 4, 2], "f_den": [1, 0, 0, 4, 3],
  "g_num": [1, 0, 0, 4, 3], "g_den": [8]
})";

std::string document(const std::string& entries) { return "{\"protocols\": [" + entries + "]}"; }

ProtocolRegistry shipped() { return load_registry_file(std::string(HOPFID_DATA_DIR) + "/jansen_registry.json"); }

}  // namespace

TEST(Bbpssw, Examples) {
    const auto one = bbpssw_step(Fidelity(1.0));
    EXPECT_DOUBLE_EQ(one.f_out.value(), 1.0);
    EXPECT_DOUBLE_EQ(one.p_round, 1.0);

    const auto half = bbpssw_step(Fidelity(0.5));
    EXPECT_NEAR(half.f_out.value(), 0.5, 1e-15);
    EXPECT_NEAR(half.p_round, 5.0 / 9.0, 1e-15);

    const auto eight = bbpssw_step(Fidelity(0.8));
    EXPECT_NEAR(eight.f_out.value(), 0.83815, 5e-6);
    EXPECT_NEAR(eight.p_round, 0.76889, 5e-6);
}

TEST(Bbpssw, MatchesExactRationalEvaluation) {
    for (int tenths = 3; tenths <= 10; ++tenths) {
        const auto exact = oracle::bbpssw(oracle::Rational(tenths, 10));
        const auto got = bbpssw_step(Fidelity(tenths / 10.0));
        EXPECT_NEAR(got.f_out.value(), oracle::to_double(exact.f_out), 1e-12) << tenths;
        EXPECT_NEAR(got.p_round, oracle::to_double(exact.p), 1e-12) << tenths;
    }
}

TEST(Bbpssw, GainRegionAndSuccessBounds) {
    for (int i = 1; i < 1000; ++i) {
        const double f = 0.5 + 0.5 * i / 1000.0;
        const auto step = bbpssw_step(Fidelity(f));
        EXPECT_GT(step.f_out.value(), f);
        EXPECT_GE(step.p_round, 5.0 / 9.0);
        EXPECT_LE(step.p_round, 1.0);
    }
}

TEST(Bbpssw, RejectsFullyMixedInput) {
    EXPECT_THROW((void)bbpssw_step(Fidelity(0.25)), DomainError);
}

TEST(Bbpssw, RationalFormAgreesWithClosedForm) {
    const auto m = bbpssw_map();
    for (int i = 0; i <= 100; ++i) {
        const double w = 0.01 + 0.99 * i / 100.0;
        const auto step = apply_map(m, WernerParameter(w));
        EXPECT_NEAR(m.f(w), step.w_out.value(), 1e-12);
        EXPECT_NEAR(m.g(w), step.p_round, 1e-12);
    }
}

TEST(ApplyMap, PerfectInput) {
    const auto res = apply_map(bbpssw_map(), WernerParameter(1.0));
    EXPECT_DOUBLE_EQ(res.w_out.value(), 1.0);
    EXPECT_DOUBLE_EQ(res.p_round, 1.0);
}

TEST(ApplyMap, FourCopyAnchors) {
    const auto registry = load_registry(document(kStab4Entry));
    const auto* m = registry.find("stab4");
    ASSERT_NE(m, nullptr);
    const auto a = apply_map(*m, WernerParameter(0.5343));
    EXPECT_NEAR(a.w_out.value(), 0.7247, 5e-4);
    EXPECT_NEAR(a.p_round, 0.2318, 5e-4);
    const auto b = apply_map(*m, WernerParameter(0.7247));
    EXPECT_NEAR(b.w_out.value(), 0.9327, 5e-4);
    EXPECT_NEAR(b.p_round, 0.4188, 5e-4);
    for (double w : {0.4, 0.6, 0.8, 0.95}) {
        EXPECT_NEAR(apply_map(*m, WernerParameter(w)).w_out.value(), oracle::stab4_f(w), 1e-14);
        EXPECT_NEAR(apply_map(*m, WernerParameter(w)).p_round, oracle::stab4_g(w), 1e-14);
    }
}

TEST(ApplyMap, ShippedRegistryFourCopyEntryPassesAnchors) {
    const auto registry = shipped();
    const auto* m = registry.find("stabilizer-4to1");
    ASSERT_NE(m, nullptr);
    EXPECT_EQ(m->r, 4);
    const auto a = apply_map(*m, WernerParameter(0.5343));
    EXPECT_NEAR(a.w_out.value(), 0.7247, 5e-4);
    EXPECT_NEAR(a.p_round, 0.2318, 5e-4);
    const auto b = apply_map(*m, WernerParameter(0.7247));
    EXPECT_NEAR(b.w_out.value(), 0.9327, 5e-4);
    EXPECT_NEAR(b.p_round, 0.4188, 5e-4);
}

TEST(ApplyMap, ShippedRegistryCoversBlockSizesThreeToSeven) {
    const auto registry = shipped();
    ASSERT_EQ(registry.size(), 6u);
    for (int r = 3; r <= 7; ++r) {
        const auto* m = registry.find("stabilizer-" + std::to_string(r) + "to1");
        ASSERT_NE(m, nullptr) << r;
        EXPECT_EQ(m->family, Family::jansen);
        for (int i = 1; i < 100; ++i) {
            const double w = 1.0 / 3.0 + (2.0 / 3.0) * i / 100.0;
            const auto res = apply_map(*m, WernerParameter(w));
            EXPECT_GT(res.p_round, 0.0);
        }
    }
}

TEST(ApplyMap, DomainAndEvaluationErrors) {
    const auto registry = load_registry(document(kStab4Entry));
    const auto* m = registry.find("stab4");
    EXPECT_THROW((void)apply_map(*m, WernerParameter(0.2)), DomainError);

    PurificationMap broken = *m;
    broken.domain = {0.0, 1.0};
    broken.f.denominator = {0.0, 1.0};
    EXPECT_THROW((void)apply_map(broken, WernerParameter(0.0)), MapEvaluationError);
}

TEST(Registry, EmptyDocumentHasOnlyBbpssw) {
    for (const char* text : {"", "  \n", "{\"protocols\": []}"}) {
        const auto registry = load_registry(text);
        ASSERT_EQ(registry.size(), 1u);
        EXPECT_EQ(registry.entries()[0].family, Family::bbpssw);
        EXPECT_EQ(registry.entries()[0].r, 2);
    }
}

TEST(Registry, OneEntryGivesTwo) {
    const auto registry = load_registry(document(kStab4Entry));
    EXPECT_EQ(registry.size(), 2u);
    EXPECT_EQ(registry.entries()[0].name, "bbpssw");
    EXPECT_EQ(registry.entries()[1].name, "stab4");
    EXPECT_EQ(registry.entries()[1].domain.lo, 1.0 / 3.0);
    EXPECT_EQ(registry.entries()[1].domain.hi, 1.0);
}

TEST(Registry, AnchorViolation) {
    const std::string bad = R"({"family": "custom", "name": "leaky", "r": 2,
        "f_num": [0, 1], "f_den": [1], "g_num": [0.9], "g_den": [1]})";
    try {
        (void)load_registry(document(bad));
        FAIL() << "expected a validation error";
    } catch (const RegistryValidationError& e) {
        EXPECT_NE(std::string(e.what()).find("perfect-input anchor violated"), std::string::npos) << e.what();
        EXPECT_NE(std::string(e.what()).find("leaky"), std::string::npos);
    }
}

TEST(Registry, ParseErrorCarriesLine) {
    try {
        (void)load_registry("{\n  \"protocols\": [\n    {\"family\": }\n  ]\n}");
        FAIL() << "expected a parse error";
    } catch (const RegistryParseError& e) {
        EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
    }
}

TEST(Registry, FieldErrorsNameTheField) {
    const std::pair<std::string, std::string> cases[] = {
        {R"({"family": "jansen", "name": "x", "r": 4, "f_num": [1], "f_den": [1], "g_num": [1]})", "protocols[0].g_den"},
        {R"({"family": "bbpssw", "name": "x", "r": 2, "f_num": [1], "f_den": [1], "g_num": [1], "g_den": [1]})",
         "protocols[0].family"},
        {R"({"family": "jansen", "name": "x", "r": "4", "f_num": [1], "f_den": [1], "g_num": [1], "g_den": [1]})",
         "protocols[0].r"},
        {R"({"family": "jansen", "name": "x", "r": 4, "variable": "fid", "f_num": [1], "f_den": [1], "g_num": [1], "g_den": [1]})",
         "protocols[0].variable"},
        {R"({"family": "jansen", "name": "x", "r": 4, "f_num": [1, "a"], "f_den": [1], "g_num": [1], "g_den": [1]})",
         "protocols[0].f_num"},
        {R"({"family": "jansen", "name": "x", "r": 4, "f_num": [1], "f_den": [1], "g_num": [1], "g_den": [1], "domain": [0.5]})",
         "protocols[0].domain"},
    };
    for (const auto& [entry, field] : cases) {
        try {
            (void)load_registry(document(entry));
            ADD_FAILURE() << "expected a parse error for " << field;
        } catch (const RegistryParseError& e) {
            EXPECT_NE(std::string(e.what()).find(field), std::string::npos) << e.what();
        }
    }
    EXPECT_THROW((void)load_registry("[1, 2]"), RegistryParseError);
}

TEST(Registry, StructuralValidation) {
    const std::string one_copy = R"({"family": "custom", "name": "solo", "r": 1,
        "f_num": [0, 1], "f_den": [1], "g_num": [1], "g_den": [1]})";
    EXPECT_THROW((void)load_registry(document(one_copy)), RegistryValidationError);

    const std::string pole = R"({"family": "custom", "name": "pole", "r": 2,
        "f_num": [-0.5, 1], "f_den": [-0.5, 1], "g_num": [1], "g_den": [1]})";
    EXPECT_THROW((void)load_registry(document(pole)), RegistryValidationError);

    const std::string overshoot = R"({"family": "custom", "name": "over", "r": 2,
        "f_num": [1.5, -0.5], "f_den": [1], "g_num": [1], "g_den": [1]})";
    EXPECT_THROW((void)load_registry(document(overshoot)), RegistryValidationError);

    EXPECT_THROW((void)load_registry(document(kStab4Entry + "," + kStab4Entry)), RegistryValidationError);
}

TEST(Registry, FidelityVariableIsConverted) {
    // BBPSSW written in the fidelity variable, loaded as a custom map.
    const std::string entry = R"({"family": "custom", "name": "bb-fid", "r": 2, "variable": "fidelity",
        "f_num": [0.1111111111111111, -0.2222222222222222, 1.1111111111111112],
        "f_den": [0.5555555555555556, -0.4444444444444444, 0.8888888888888888],
        "g_num": [0.5555555555555556, -0.4444444444444444, 0.8888888888888888], "g_den": [1],
        "domain": [0.5, 1.0]})";
    const auto registry = load_registry(document(entry));
    const auto* m = registry.find("bb-fid");
    ASSERT_NE(m, nullptr);
    EXPECT_EQ(m->declared_variable, QualityVariable::fidelity);
    EXPECT_NEAR(m->domain.lo, 1.0 / 3.0, 1e-15);
    for (int i = 0; i <= 50; ++i) {
        const double w = 1.0 / 3.0 + (2.0 / 3.0) * i / 50.0;
        const auto ref = apply_map(bbpssw_map(), WernerParameter(w));
        const auto got = apply_map(*m, WernerParameter(w));
        EXPECT_NEAR(got.w_out.value(), ref.w_out.value(), 1e-12);
        EXPECT_NEAR(got.p_round, ref.p_round, 1e-12);
    }
}

TEST(Registry, Deterministic) {
    EXPECT_EQ(shipped(), shipped());
    EXPECT_EQ(load_registry(document(kStab4Entry)), load_registry(document(kStab4Entry)));
}

TEST(Registry, MissingFile) {
    EXPECT_THROW((void)load_registry_file("/nonexistent/registry.json"), RegistryParseError);
}

TEST(Registry, FamilyNames) {
    EXPECT_EQ(parse_family("jansen"), Family::jansen);
    EXPECT_EQ(parse_family("bbpssw"), Family::bbpssw);
    EXPECT_EQ(parse_family("custom"), Family::custom);
    EXPECT_FALSE(parse_family("dejmps").has_value());
    EXPECT_EQ(to_string(Family::jansen), "jansen");
}
