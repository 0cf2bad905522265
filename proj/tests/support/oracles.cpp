#include "oracles.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <asyncsynth/multithread.hpp>

namespace asyncsynth::testing {

bool subset(const Bits& a, const Bits& b) {
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i] && !b[i]) return false;
  return true;
}

std::set<Bits> BruteForce::sound_set() const {
  std::set<Bits> out;
  for (std::size_t i = 0; i < all.size(); ++i)
    if (sound[i]) out.insert(all[i].covered());
  return out;
}

std::optional<Bits> BruteForce::max_sound_below(const Bits& a) const {
  std::vector<const Bits*> below;
  for (std::size_t i = 0; i < all.size(); ++i)
    if (sound[i] && subset(all[i].covered(), a)) below.push_back(&all[i].covered());
  for (const Bits* c : below) {
    bool greatest = true;
    for (const Bits* d : below)
      if (!subset(*d, *c)) greatest = false;
    if (greatest) return *c;
  }
  return std::nullopt;
}

BruteForce brute_force(const ProgramAst& p, const ExplorationConfig& cfg, Semantics sem) {
  BruteForce bf;
  bf.all = all_asyncs_bruteforce(p);
  for (const auto& a : bf.all) {
    const ProgramAst& q = a.program();
    auto races = sem == Semantics::Threads ? mt_find_races(q, cfg, 1) : find_data_races(q, cfg, 1);
    bf.sound.push_back(races.races.empty());
  }
  return bf;
}

std::string read_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string corpus_path(const std::string& name) { return std::string(ASYNCSYNTH_CORPUS_DIR) + "/" + name + ".tal"; }

}  // namespace asyncsynth::testing
