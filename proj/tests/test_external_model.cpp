#include <gtest/gtest.h>

#include <random>

#include "canouq/error.hpp"
#include "canouq/external_model.hpp"
#include "canouq/models.hpp"
#include "canouq/ouq_engine.hpp"

using namespace canouq;

namespace {

std::vector<std::string> child(std::initializer_list<std::string> args) {
    std::vector<std::string> argv{MODEL_CHILD_PATH};
    argv.insert(argv.end(), args);
    return argv;
}

}  // namespace

TEST(ExternalCommandModel, EvaluatesBatchesLargerThanWindow) {
    ExternalCommandModel model(child({"sum"}), 3);
    EXPECT_EQ(model.cost(), EvaluationCost::expensive);
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-10, 10);
    std::vector<double> points(3 * 200);
    for (auto& v : points) v = u(rng);
    std::vector<double> out(200);
    model.evaluate_batch(points, out);
    for (std::size_t i = 0; i < out.size(); ++i)
        EXPECT_DOUBLE_EQ(out[i], points[3 * i] + points[3 * i + 1] + points[3 * i + 2]);
    // Full-precision round trip of the request encoding.
    const std::vector<double> exact{0.1, 1e-300, 0.0};
    EXPECT_EQ(model.evaluate(exact), 0.1 + 1e-300);
}

TEST(ExternalCommandModel, ChildExitReported) {
    auto model = std::make_shared<ExternalCommandModel>(child({"crash-after", "2"}), 1);
    ModelEvaluator evaluator(model);
    const std::vector<double> points{0.1, 0.2, 0.3};
    std::vector<double> out(3);
    try {
        evaluator.evaluate(points, out);
        FAIL() << "expected ModelEvaluationFailure";
    } catch (const ModelEvaluationFailure& e) {
        ASSERT_EQ(e.point().size(), 1u);
        EXPECT_DOUBLE_EQ(e.point()[0], 0.3);
        EXPECT_NE(std::string(e.what()).find("exit status 3"), std::string::npos) << e.what();
    }
    // A fresh child is started for the next batch.
    std::vector<double> one(1);
    evaluator.evaluate(std::vector<double>{0.7}, one);
    EXPECT_DOUBLE_EQ(one[0], 0.7);
}

TEST(ExternalCommandModel, MalformedOutputReported) {
    ExternalCommandModel model(child({"garbage"}), 2);
    std::vector<double> out(1);
    try {
        model.evaluate_batch(std::vector<double>{1.0, 2.0}, out);
        FAIL() << "expected ModelEvaluationFailure";
    } catch (const ModelEvaluationFailure& e) {
        EXPECT_NE(std::string(e.what()).find("malformed"), std::string::npos);
    }
}

TEST(ExternalCommandModel, MissingCommand) {
    ExternalCommandModel model({"/nonexistent/model-binary"}, 1);
    std::vector<double> out(1);
    EXPECT_THROW(model.evaluate_batch(std::vector<double>{1.0}, out), Error);
    EXPECT_THROW(ExternalCommandModel({}, 1), InvalidArgument);
    EXPECT_THROW(ExternalCommandModel(child({"sum"}), 0), InvalidArgument);
}

TEST(ExternalCommandModel, ConcurrentPoolMatchesSerial) {
    const std::vector<MomentSpec> specs{MomentSpec(0.0, 1.0, EqualityMoments{{0.5}}),
                                        MomentSpec(0.0, 2.0, EqualityMoments{{0.8, 1.0}})};
    OptimizerConfig cfg;
    cfg.seed = 3;
    cfg.max_iterations = 15;
    const auto serial = min_pof(specs, std::make_shared<ExternalCommandModel>(child({"sum"}), 2), 1.1, cfg);
    cfg.parallel_evaluations = true;
    cfg.threads = 3;
    const auto pooled = min_pof(specs, std::make_shared<ExternalCommandModel>(child({"sum"}), 2, true, 3), 1.1, cfg);
    const auto builtin = min_pof(specs, std::make_shared<models::SumModel>(std::vector<double>{1.0, 1.0}), 1.1, cfg);
    EXPECT_EQ(serial.value, pooled.value);
    EXPECT_EQ(serial.argmin_params, pooled.argmin_params);
    EXPECT_EQ(serial.value, builtin.value);
}
