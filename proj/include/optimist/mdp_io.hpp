#pragma once

#include <string>

#include "json.hpp"
#include "optimist/mdp.hpp"

namespace optimist {

// {"S":..,"A":..,"H":..,"x1":..,"r":[[..]],"P":[[[[..]]]]} with r indexed
// [x][a] and P indexed [h][x][a][y]. A P with a single stage is replicated
// over all H stages.
TabularMDP mdp_from_json(const nlohmann::json& doc);
nlohmann::json mdp_to_json(const TabularMDP& mdp);
TabularMDP load_mdp(const std::string& path);

}  // namespace optimist
