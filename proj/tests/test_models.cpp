#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "canouq/error.hpp"
#include "canouq/models.hpp"

using namespace canouq;
using namespace canouq::models;

TEST(Hydraulic, NominalHeight) {
    // sqrt(4.5 / 5000) = 0.03 and 1013 / (300 * 30 * 0.03) = 3.75185...
    EXPECT_NEAR(hydraulic_height({1013, 30, 50, 54.5}), std::pow(1013.0 / 270.0, 0.6), 1e-12);
    EXPECT_NEAR(hydraulic_height({1013, 30, 50, 54.5}), 2.21079, 1e-5);
    EXPECT_EQ(hydraulic_height({0, 30, 50, 54.5}), 0.0);
}

TEST(Hydraulic, PowerLawScaling) {
    const double ratio = hydraulic_height({4 * 800, 30, 50, 54.5}) / hydraulic_height({800, 30, 50, 54.5});
    EXPECT_NEAR(ratio, std::pow(4.0, 0.6), 1e-12);
    EXPECT_NEAR(ratio, 2.2974, 1e-4);
}

TEST(Hydraulic, DomainErrors) {
    EXPECT_THROW(hydraulic_height({1000, 30, 55, 54}), DomainError);
    EXPECT_THROW(hydraulic_height({1000, 30, 54, 54}), DomainError);
    EXPECT_THROW(hydraulic_height({1000, 0, 50, 54.5}), DomainError);
    EXPECT_THROW(hydraulic_height({-1, 30, 50, 54.5}), DomainError);
}

TEST(Hydraulic, MonotoneDirections) {
    std::mt19937_64 rng(1);
    const auto inputs = hydraulic_inputs();
    auto draw = [&](std::size_t i) {
        return std::uniform_real_distribution<double>(inputs[i].lower, inputs[i].upper)(rng);
    };
    for (int trial = 0; trial < 100; ++trial) {
        const HydraulicInput x{draw(0), draw(1), draw(2), draw(3)};
        const double h = hydraulic_height(x);
        const double d = 1e-4;
        EXPECT_GT(hydraulic_height({x.flow + d, x.strickler, x.downstream, x.upstream}), h);
        EXPECT_LT(hydraulic_height({x.flow, x.strickler + d, x.downstream, x.upstream}), h);
        EXPECT_LT(hydraulic_height({x.flow, x.strickler, x.downstream, x.upstream + d}), h);
        EXPECT_GT(hydraulic_height({x.flow, x.strickler, x.downstream + d, x.upstream}), h);
    }
}

TEST(Hydraulic, BatchMatchesScalar) {
    HydraulicModel model;
    const std::vector<double> points{1013, 30, 50, 54.5, 2000, 20, 49.5, 54.2};
    std::vector<double> out(2);
    model.evaluate_batch(points, out);
    EXPECT_EQ(out[0], hydraulic_height({1013, 30, 50, 54.5}));
    EXPECT_EQ(out[1], hydraulic_height({2000, 20, 49.5, 54.2}));
}

TEST(Identity, PassesThrough) {
    for (double x : {0.3, 1.0, -2.5}) EXPECT_EQ(identity_model(std::vector<double>{x}), x);
    IdentityModel m;
    EXPECT_EQ(m.evaluate(std::vector<double>{0.3}), 0.3);
}

TEST(Sum, ScaledSum) {
    SumModel m({1.0, 2.0, -0.5});
    EXPECT_DOUBLE_EQ(m.evaluate(std::vector<double>{1.0, 1.0, 2.0}), 2.0);
    EXPECT_THROW(SumModel({}), InvalidArgument);
}

TEST(PlugInCdf, UniformIdentity) {
    const std::vector<Distribution> d{Distribution{Uniform{0, 1}, {}}};
    const std::vector<double> h{0.5};
    const std::size_t n = 100000;
    const auto cdf = plug_in_cdf(d, IdentityModel(), h, n, 3);
    EXPECT_NEAR(cdf[0].second, 0.5, 3 * std::sqrt(0.25 / n));
}

TEST(PlugInCdf, PointMassIsStep) {
    const std::vector<Distribution> d{Distribution{Uniform{2.0, 2.0 + 1e-12}, {}}};
    const std::vector<double> h{1.999, 2.0 + 2e-12, 3.0};
    const auto cdf = plug_in_cdf(d, IdentityModel(), h, 5000, 4);
    EXPECT_EQ(cdf[0].second, 0.0);
    EXPECT_EQ(cdf[1].second, 1.0);
    EXPECT_EQ(cdf[2].second, 1.0);
}

TEST(PlugInCdf, HydraulicUpperQuantileAboveNominal) {
    const auto inputs = hydraulic_inputs();
    const auto d = nominal_distributions(inputs);
    std::vector<double> h;
    for (int k = 0; k <= 200; ++k) h.push_back(0.05 * k);
    const auto cdf = plug_in_cdf(d, HydraulicModel(), h, 100000, 5, 2);
    for (std::size_t k = 1; k < cdf.size(); ++k) EXPECT_GE(cdf[k].second, cdf[k - 1].second);
    const auto q99 = std::find_if(cdf.begin(), cdf.end(), [](const auto& p) { return p.second >= 0.99; });
    ASSERT_NE(q99, cdf.end());
    EXPECT_GT(q99->first, 2.21079);
}

TEST(PlugInCdf, IndependentOfThreadCount) {
    const auto d = nominal_distributions(hydraulic_inputs());
    const std::vector<double> h{2.0, 2.5, 3.0};
    const auto a = plug_in_cdf(d, HydraulicModel(), h, 50000, 6, 1);
    const auto b = plug_in_cdf(d, HydraulicModel(), h, 50000, 6, 4);
    EXPECT_EQ(a, b);
}

TEST(PlugInCdf, DimensionChecked) {
    const std::vector<Distribution> d{Distribution{Uniform{0, 1}, {}}};
    const std::vector<double> h{0.5};
    EXPECT_THROW(plug_in_cdf(d, HydraulicModel(), h, 10, 1), InvalidArgument);
}

TEST(Distributions, TruncationRespected) {
    std::mt19937_64 rng(7);
    const Distribution d{Normal{30.0, 7.5}, {{12.55, 47.45}}};
    for (int i = 0; i < 10000; ++i) {
        const double x = d.sample(rng);
        EXPECT_GE(x, 12.55);
        EXPECT_LE(x, 47.45);
    }
    const Distribution empty{Normal{0.0, 1.0}, {{50.0, 51.0}}};
    EXPECT_THROW(empty.sample(rng), DomainError);
}

TEST(Presets, PublishedMomentsAgreeWithTruncatedLaws) {
    // Rounded published depth second moments are excluded: they disagree with
    // the stated uniform laws by more than sampling error.
    const auto published = hydraulic_published_moments();
    const std::size_t n = 1000000;
    for (std::size_t i = 0; i < published.size(); ++i) {
        const auto m = sample_moments(*published[i].distribution, 3, n, 100 + i);
        for (std::size_t j = 0; j < 3; ++j) {
            const bool whitelisted = (published[i].name == "Zv" || published[i].name == "Zm") && j == 1;
            if (whitelisted) continue;
            EXPECT_NEAR(m.means[j], published[i].moments[j], 3 * m.standard_errors[j])
                << published[i].name << " order " << j + 1;
        }
    }
}

TEST(Presets, ExactDepthMomentsAgreeWithUniformLaws) {
    const auto inputs = hydraulic_inputs();
    for (std::size_t i = 2; i < 4; ++i) {
        const auto m = sample_moments(*inputs[i].distribution, 3, 1000000, 200 + i);
        for (std::size_t j = 0; j < 3; ++j)
            EXPECT_NEAR(m.means[j], inputs[i].moments[j], 3 * m.standard_errors[j]) << inputs[i].name;
    }
}

TEST(Presets, PublishedDepthMomentsAreNotInterior) {
    const auto published = hydraulic_published_moments();
    for (std::size_t i = 2; i < 4; ++i)
        EXPECT_THROW(MomentSpec(published[i].lower, published[i].upper, EqualityMoments{published[i].moments}),
                     OutsideMomentSpace)
            << published[i].name;
}

TEST(Presets, HydraulicSpecs) {
    for (std::size_t order = 1; order <= 3; ++order) {
        const auto specs = hydraulic_specs(order);
        ASSERT_EQ(specs.size(), 4u);
        for (const auto& s : specs) EXPECT_EQ(s.order(), order);
    }
    EXPECT_THROW(hydraulic_specs(0), InvalidArgument);
    EXPECT_THROW(hydraulic_specs(4), InvalidArgument);
}

TEST(Presets, CathareShape) {
    const auto inputs = cathare_inputs();
    ASSERT_EQ(inputs.size(), 9u);
    const auto specs = cathare_specs();
    ASSERT_EQ(specs.size(), 9u);
    for (const auto& s : specs) EXPECT_EQ(s.order(), 2u);
    EXPECT_THROW(nominal_distributions(inputs), InvalidArgument);
    EXPECT_FALSE(inputs[2].distribution.has_value());
}

TEST(SampleMoments, Uniform) {
    const auto m = sample_moments(Distribution{Uniform{0, 1}, {}}, 2, 200000, 9);
    EXPECT_NEAR(m.means[0], 0.5, 3 * m.standard_errors[0]);
    EXPECT_NEAR(m.means[1], 1.0 / 3.0, 3 * m.standard_errors[1]);
}
