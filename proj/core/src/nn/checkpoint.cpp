#include "bangbang/nn/checkpoint.hpp"

#include "bangbang/error.hpp"
#include "json_io.hpp"

namespace bangbang::nn {

NetworkSnapshot snapshot(const Mlp& mlp, const Adam* optimizer) {
  NetworkSnapshot snap;
  snap.layer_sizes = mlp.layer_sizes();
  snap.activation = mlp.activation();
  for (const auto& p : mlp.parameters()) {
    const Matrix& m = p.value();
    std::vector<double> flat;
    flat.reserve(static_cast<std::size_t>(m.size()));
    for (Index i = 0; i < m.rows(); ++i) {
      for (Index j = 0; j < m.cols(); ++j) flat.push_back(m(i, j));
    }
    snap.tensors.push_back(std::move(flat));
  }
  if (optimizer) snap.optimizer = optimizer->moments();
  return snap;
}

Mlp restore(const NetworkSnapshot& snap) {
  Rng unused(0);
  Mlp mlp(snap.layer_sizes, snap.activation, unused);
  if (snap.tensors.size() != mlp.parameters().size()) {
    throw ShapeError("checkpoint has " + std::to_string(snap.tensors.size()) +
                     " tensors, network expects " + std::to_string(mlp.parameters().size()));
  }
  std::vector<double> flat;
  for (const auto& t : snap.tensors) flat.insert(flat.end(), t.begin(), t.end());
  mlp.set_flat(flat);
  return mlp;
}

nlohmann::json network_json(const NetworkSnapshot& snap) {
  nlohmann::json j;
  j["version"] = kCheckpointVersion;
  j["layer_sizes"] = snap.layer_sizes;
  j["activation"] = std::string(to_string(snap.activation));
  j["weights"] = snap.tensors;
  j["optimizer"] = {{"step", snap.optimizer.step},
                    {"m", snap.optimizer.m},
                    {"v", snap.optimizer.v}};
  return j;
}

NetworkSnapshot network_from(const nlohmann::json& j) {
  try {
    if (j.at("version").get<int>() != kCheckpointVersion) {
      throw Error("unsupported network checkpoint version");
    }
    NetworkSnapshot snap;
    snap.layer_sizes = j.at("layer_sizes").get<std::vector<int>>();
    snap.activation = parse_activation(j.at("activation").get<std::string>());
    snap.tensors = j.at("weights").get<std::vector<std::vector<double>>>();
    if (j.contains("optimizer")) {
      const auto& o = j.at("optimizer");
      snap.optimizer.step = o.at("step").get<long long>();
      snap.optimizer.m = o.at("m").get<std::vector<double>>();
      snap.optimizer.v = o.at("v").get<std::vector<double>>();
    }
    return snap;
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("malformed network checkpoint: ") + e.what());
  }
}

std::string network_to_json(const NetworkSnapshot& snap) { return network_json(snap).dump(); }

NetworkSnapshot network_from_json(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("checkpoint is not valid JSON: ") + e.what());
  }
  return network_from(j);
}

}  // namespace bangbang::nn
