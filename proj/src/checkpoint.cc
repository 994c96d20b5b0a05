// Copyright 2026 The SquadLab Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "squadlab/checkpoint.h"

#include "squadlab/io.h"

namespace squadlab {

using nlohmann::ordered_json;

Checkpoint snapshot(const ParameterStore& store, std::uint64_t seed, ordered_json config) {
  Checkpoint c;
  c.seed = seed;
  c.config = std::move(config);
  for (const auto& e : store.entries()) c.parameters.emplace_back(e.name, e.tensor.detach());
  return c;
}

void restore(const Checkpoint& checkpoint, ParameterStore& store) {
  if (checkpoint.parameters.size() != store.entries().size()) {
    throw DataError("checkpoint has " + std::to_string(checkpoint.parameters.size()) +
                    " parameters, model expects " + std::to_string(store.entries().size()));
  }
  for (const auto& [name, value] : checkpoint.parameters) {
    const Tensor* target = store.find(name);
    if (!target) throw DataError("checkpoint parameter " + name + " is not part of the model");
    if (target->shape() != value.shape()) {
      throw DataError("checkpoint parameter " + name + " has shape " + shape_str(value.shape()) +
                      ", model expects " + shape_str(target->shape()));
    }
    Tensor t = *target;
    auto dst = t.mutable_data();
    std::copy(value.data().begin(), value.data().end(), dst.begin());
  }
}

ordered_json checkpoint_to_json(const Checkpoint& checkpoint) {
  ordered_json j;
  j["format"] = "squadlab-checkpoint";
  j["version"] = 1;
  j["seed"] = checkpoint.seed;
  j["config"] = checkpoint.config;
  ordered_json params = ordered_json::object();
  for (const auto& [name, value] : checkpoint.parameters) {
    ordered_json p;
    p["shape"] = value.shape();
    p["values"] = std::vector<double>(value.data().begin(), value.data().end());
    params[name] = std::move(p);
  }
  j["parameters"] = std::move(params);
  return j;
}

Checkpoint checkpoint_from_json(const ordered_json& j) {
  try {
    if (j.at("format") != "squadlab-checkpoint") throw DataError("not a squadlab checkpoint");
    if (j.at("version") != 1) throw DataError("unsupported checkpoint version");
    Checkpoint c;
    c.seed = j.at("seed").get<std::uint64_t>();
    c.config = j.at("config");
    for (const auto& [name, p] : j.at("parameters").items()) {
      c.parameters.emplace_back(name, Tensor(p.at("shape").get<Shape>(),
                                             p.at("values").get<std::vector<double>>()));
    }
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed checkpoint: ") + e.what());
  } catch (const ShapeError& e) {
    throw DataError(std::string("malformed checkpoint: ") + e.what());
  }
}

void save_checkpoint(const std::string& path, const Checkpoint& checkpoint) {
  write_file(path, checkpoint_to_json(checkpoint).dump() + "\n");
}

Checkpoint load_checkpoint(const std::string& path) {
  ordered_json j;
  try {
    j = ordered_json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path + ": " + e.what());
  }
  return checkpoint_from_json(j);
}

}  // namespace squadlab
