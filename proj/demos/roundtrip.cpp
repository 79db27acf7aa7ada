// Decompose a random plane with the packet transform, rebuild it level
// by level, and report the worst reconstruction error and the energy
// split across subbands.

#include <cstdio>

#include "uhrseg/core.hpp"
#include "uhrseg/wavelet.hpp"

int main() {
  using namespace uhrseg;
  SeededRng rng(42);
  Plane p(64, 64);
  for (float& v : p.data) v = static_cast<float>(rng.uniform01());

  const int depth = 3;
  BasicPacketTree<float> tree = packet_decompose(p, depth);
  std::printf("input %dx%d, packet depth %d\n", p.width, p.height, depth);
  for (int l = 0; l <= depth; ++l) {
    double energy = 0;
    for (const Plane& node : tree.nodes[l]) energy += plane_energy(node);
    std::printf("  level %d: %3zu nodes of %2dx%-2d  energy %.6f\n", l, tree.nodes[l].size(),
                tree.nodes[l][0].width, tree.nodes[l][0].height, energy);
  }

  // collapse the deepest level back up
  std::vector<Plane> level = tree.nodes[depth];
  for (int l = depth; l >= 1; --l) {
    std::vector<Plane> up;
    for (std::size_t j = 0; j < level.size(); j += 4) {
      const BasicSubbandQuad<float> quad{level[j], level[j + 1], level[j + 2], level[j + 3]};
      up.push_back(iwt2(quad));
    }
    level = std::move(up);
  }
  double worst = 0;
  for (std::size_t i = 0; i < p.size(); ++i)
    worst = std::max(worst, static_cast<double>(std::abs(level[0].data[i] - p.data[i])));
  std::printf("max |reconstruction - input| = %.3g\n", worst);
  return 0;
}
