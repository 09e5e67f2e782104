#pragma once

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "qforest/baselines.hpp"
#include "qforest/forest.hpp"
#include "qforest/qsim.hpp"
#include "qforest/tree.hpp"

namespace qforest::io {

using nlohmann::json;

json matrix_to_json(const Eigen::MatrixXd& m);
Eigen::MatrixXd matrix_from_json(const json& j);
json vector_to_json(const Eigen::VectorXd& v);
Eigen::VectorXd vector_from_json(const json& j);

json to_json(const EmbeddingSpec& spec);
EmbeddingSpec embedding_from_json(const json& j);

json to_json(const ShotPlan& plan);
ShotPlan plan_from_json(const json& j);

json to_json(const TrainConfig& config);
TrainConfig train_config_from_json(const json& j);

json to_json(const Tree& tree);
Tree tree_from_json(const json& j);

json to_json(const Forest& forest);
Forest forest_from_json(const json& j);

json to_json(const CartTree& tree);
CartTree cart_tree_from_json(const json& j);

json to_json(const CartForest& forest);
CartForest cart_forest_from_json(const json& j);

json to_json(const KernelSvmClassifier& clf);
KernelSvmClassifier kernel_svm_from_json(const json& j);

}  // namespace qforest::io
