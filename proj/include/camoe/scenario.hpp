#pragma once

#include "camoe/graph.hpp"
#include "camoe/spectral.hpp"

namespace camoe {

/// A graph together with its exact path and resistance oracles.
struct Scenario {
  EuclideanGraph graph;
  PathOracle paths;
  ResistanceOracle resistance;

  explicit Scenario(EuclideanGraph g, Conductance conductance = Conductance::Unit)
      : graph(std::move(g)), paths(graph), resistance(resistance_oracle(graph, conductance)) {}
};

}  // namespace camoe
