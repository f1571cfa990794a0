#include <random>

#include <gtest/gtest.h>

#include "codedist/hierarchy.hpp"
#include "test_support.hpp"

namespace codedist {
namespace {

ConceptId C(std::uint64_t v) { return ConceptId{v}; }

HierarchyGraph chain3() { return build_hierarchy({C(1), C(2), C(3)}, {{C(1), C(2)}, {C(2), C(3)}}); }

// diamond: 1 -> 2, 1 -> 3, 2 -> 4, 3 -> 4
HierarchyGraph diamond() {
  return build_hierarchy({C(1), C(2), C(3), C(4)},
                         {{C(1), C(2)}, {C(1), C(3)}, {C(2), C(4)}, {C(3), C(4)}});
}

TEST(BuildHierarchy, MinimalChain) {
  auto g = chain3();
  EXPECT_EQ(g.concept_count(), 3u);
  EXPECT_EQ(g.edge_count(), 2u);
}

TEST(BuildHierarchy, ShoulderTendinitisChain) {
  auto g = build_hierarchy({C(202852009), C(239955008), C(76318008)},
                           {{C(202852009), C(239955008)}, {C(239955008), C(76318008)}});
  EXPECT_EQ(g.concept_count(), 3u);
  EXPECT_EQ(g.edge_count(), 2u);
  auto i = g.index_of(C(202852009));
  ASSERT_TRUE(i);
  ASSERT_EQ(g.parents(*i).size(), 1u);
  EXPECT_EQ(g.id_at(g.parents(*i)[0]), C(239955008));
}

TEST(BuildHierarchy, DeduplicatesConceptsAndEdges) {
  auto g = build_hierarchy({C(2), C(1), C(2)}, {{C(1), C(2)}, {C(1), C(2)}});
  EXPECT_EQ(g.concept_count(), 2u);
  EXPECT_EQ(g.edge_count(), 1u);
}

TEST(BuildHierarchy, TwoCycleIsRejectedWithWitness) {
  try {
    build_hierarchy({C(1), C(2)}, {{C(1), C(2)}, {C(2), C(1)}});
    FAIL() << "expected CycleDetected";
  } catch (const CycleDetected& e) {
    EXPECT_EQ(e.kind(), ErrorKind::CycleDetected);
    ASSERT_EQ(e.witness().size(), 3u);
    EXPECT_EQ(e.witness().front(), e.witness().back());
  }
}

TEST(BuildHierarchy, CycleWitnessSkipsNodesBelowTheCycle) {
  // 4 hangs below the 1-2-3 cycle and must not appear in the witness.
  try {
    build_hierarchy({C(1), C(2), C(3), C(4)},
                    {{C(1), C(2)}, {C(2), C(3)}, {C(3), C(1)}, {C(4), C(3)}});
    FAIL();
  } catch (const CycleDetected& e) {
    EXPECT_EQ(e.witness().size(), 4u);
    for (auto v : e.witness()) EXPECT_NE(v, 4u);
  }
}

TEST(BuildHierarchy, SelfEdge) {
  try {
    build_hierarchy({C(1)}, {{C(1), C(1)}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::SelfEdge);
    EXPECT_NE(std::string(e.what()).find("1"), std::string::npos);
  }
}

TEST(BuildHierarchy, DanglingEdge) {
  try {
    build_hierarchy({C(1)}, {{C(1), C(7)}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DanglingEdge);
    EXPECT_NE(std::string(e.what()).find("7"), std::string::npos);
  }
}

TEST(BuildHierarchy, ZeroIdRejected) {
  try {
    build_hierarchy({C(0), C(1)}, {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InvalidConceptId);
  }
}

TEST(FocusSubgraph, FullChainInclusive) {
  auto g = chain3();
  auto v = focus_subgraph(g, C(3));
  EXPECT_EQ(v.members(), (std::vector<ConceptId>{C(1), C(2), C(3)}));
}

TEST(FocusSubgraph, ProperSubtree) {
  auto g = chain3();
  auto v = focus_subgraph(g, C(2), true);
  EXPECT_EQ(v.members(), (std::vector<ConceptId>{C(1), C(2)}));
  EXPECT_FALSE(v.contains(C(3)));
}

TEST(FocusSubgraph, DiamondNonInclusive) {
  // Brute force: the nodes with an upward path to 4 are 1, 2, 3.
  auto g = diamond();
  auto v = focus_subgraph(g, C(4), false);
  EXPECT_EQ(v.members(), (std::vector<ConceptId>{C(1), C(2), C(3)}));
  EXPECT_EQ(v.size(), 3u);
}

TEST(FocusSubgraph, UnknownRoot) {
  auto g = chain3();
  try {
    focus_subgraph(g, C(99));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::UnknownConcept);
  }
}

TEST(AncestorDistances, ChainDepths) {
  auto g = chain3();
  auto v = focus_subgraph(g, C(3));
  EXPECT_EQ(ancestor_distances(v, C(1)),
            (std::map<ConceptId, Hops>{{C(1), 0}, {C(2), 1}, {C(3), 2}}));
}

TEST(AncestorDistances, DiamondBfs) {
  auto g = diamond();
  auto v = focus_subgraph(g, C(4));
  EXPECT_EQ(ancestor_distances(v, C(1)),
            (std::map<ConceptId, Hops>{{C(1), 0}, {C(2), 1}, {C(3), 1}, {C(4), 2}}));
}

TEST(AncestorDistances, RootHasOnlyItself) {
  auto g = build_hierarchy({C(1), C(2), C(3), C(9)}, {{C(1), C(2)}, {C(2), C(3)}, {C(3), C(9)}});
  auto v = focus_subgraph(g, C(3));
  EXPECT_EQ(ancestor_distances(v, C(3)), (std::map<ConceptId, Hops>{{C(3), 0}}));
  // 9 lies above the focus and is never traversed.
  EXPECT_EQ(ancestor_distances(v, C(1)).count(C(9)), 0u);
}

TEST(AncestorDistances, OutOfFocus) {
  auto g = chain3();
  auto v = focus_subgraph(g, C(2));
  try {
    ancestor_distances(v, C(3));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::OutOfFocus);
  }
}

TEST(ConceptDistance, ShoulderChainIsTwo) {
  auto g = build_hierarchy({C(202852009), C(239955008), C(76318008)},
                           {{C(202852009), C(239955008)}, {C(239955008), C(76318008)}});
  auto v = focus_subgraph(g, C(76318008));
  EXPECT_EQ(concept_distance(v, C(202852009), C(76318008)), 2u);
}

TEST(ConceptDistance, SiblingsUnderOsteoarthritisIsTwo) {
  auto g = build_hierarchy({C(443524000), C(239873007), C(396275006)},
                           {{C(443524000), C(396275006)}, {C(239873007), C(396275006)}});
  auto v = focus_subgraph(g, C(396275006));
  EXPECT_EQ(concept_distance(v, C(443524000), C(239873007)), 2u);
  EXPECT_EQ(lowest_common_ancestor(v, C(443524000), C(239873007)).witness, C(396275006));
}

TEST(ConceptDistance, Identity) {
  auto g = diamond();
  auto v = focus_subgraph(g, C(4));
  for (auto c : v.members()) EXPECT_EQ(concept_distance(v, c, c), 0u);
}

TEST(ConceptDistance, DiamondSiblingsViaCommonAncestor) {
  // Common ancestors of 2 and 3: only 4, giving 1 + 1. The path through the
  // common descendant 1 is not an up-then-down path.
  auto g = diamond();
  auto v = focus_subgraph(g, C(4));
  EXPECT_EQ(concept_distance(v, C(2), C(3)), 2u);
}

TEST(ConceptDistance, NonInclusiveViewStillMeetsAtRoot) {
  auto g = diamond();
  auto v = focus_subgraph(g, C(4), false);
  EXPECT_EQ(concept_distance(v, C(2), C(3)), 2u);
  try {
    concept_distance(v, C(4), C(2));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::OutOfFocus);
  }
}

TEST(ConceptDistance, WitnessTieBreakPicksLowestId) {
  // 10 under both 20 and 30, 11 under both: two common ancestors at sum 2.
  auto g = build_hierarchy({C(10), C(11), C(20), C(30), C(40)},
                           {{C(10), C(20)}, {C(10), C(30)}, {C(11), C(20)}, {C(11), C(30)},
                            {C(20), C(40)}, {C(30), C(40)}});
  auto v = focus_subgraph(g, C(40));
  auto r = lowest_common_ancestor(v, C(11), C(10));
  EXPECT_EQ(r.distance, 2u);
  EXPECT_EQ(r.witness, C(20));
}

TEST(DistanceCache, MemoizesPerConcept) {
  auto g = diamond();
  auto v = focus_subgraph(g, C(4));
  DistanceCache cache(v);
  EXPECT_EQ(cache.distance(C(1), C(4)), 2u);
  EXPECT_EQ(cache.cached(), 2u);
  EXPECT_EQ(cache.distance(C(4), C(1)), 2u);
  EXPECT_EQ(cache.cached(), 2u);
}

TEST(TransitiveReduction, RemovesImpliedEdges) {
  // Closure-style input: 1 -> 3 is implied by 1 -> 2 -> 3.
  auto g = build_hierarchy({C(1), C(2), C(3)}, {{C(1), C(2)}, {C(2), C(3)}, {C(1), C(3)}});
  auto v = focus_subgraph(g, C(3));
  EXPECT_EQ(concept_distance(v, C(1), C(3)), 1u);
  auto r = transitive_reduction(g);
  EXPECT_EQ(r.edge_count(), 2u);
  auto rv = focus_subgraph(r, C(3));
  EXPECT_EQ(concept_distance(rv, C(1), C(3)), 2u);
}

TEST(TransitiveReduction, KeepsDiamond) {
  auto g = diamond();
  EXPECT_EQ(transitive_reduction(g), g);
}

// ---------------------------------------------------------------------------
// Properties over random DAGs

class RandomDagTest : public ::testing::Test {
 protected:
  std::mt19937_64 rng{20170131};
};

TEST_F(RandomDagTest, MatchesBruteForceOracle) {
  for (int round = 0; round < 300; ++round) {
    std::uniform_int_distribution<std::size_t> size(2, 50);
    auto d = testing::random_dag(rng, size(rng));
    std::uniform_int_distribution<std::size_t> pick(0, std::min<std::size_t>(3, d.concepts.size() - 1));
    const ConceptId root = d.concepts[pick(rng)];
    const bool inclusive = round % 3 != 0;
    auto g = build_hierarchy(d.concepts, d.edges);
    auto v = focus_subgraph(g, root, inclusive);
    testing::Oracle oracle(d.concepts, d.edges, root, inclusive);
    const auto members = v.members();
    ASSERT_EQ(std::set<ConceptId>(members.begin(), members.end()), oracle.members());
    DistanceCache cache(v);
    for (auto x : v.members())
      for (auto y : v.members()) ASSERT_EQ(cache.distance(x, y), *oracle.distance(x, y));
  }
}

TEST_F(RandomDagTest, SymmetryAndIdentity) {
  for (int round = 0; round < 200; ++round) {
    auto d = testing::random_dag(rng, 30);
    auto g = build_hierarchy(d.concepts, d.edges);
    auto v = focus_subgraph(g, d.root);
    DistanceCache cache(v);
    for (auto x : v.members())
      for (auto y : v.members()) {
        const Hops xy = cache.distance(x, y);
        ASSERT_EQ(xy, cache.distance(y, x));
        ASSERT_EQ(xy == 0, x == y);
      }
  }
}

// In a tree the distance to an ancestor is the chain length. In a DAG a
// shortcut to a higher common ancestor can make it shorter, never longer.
TEST_F(RandomDagTest, AncestorChainDistance) {
  for (int round = 0; round < 200; ++round) {
    const bool tree = round % 2 == 0;
    auto d = testing::random_dag(rng, 30, tree ? 0.0 : 0.35);
    auto g = build_hierarchy(d.concepts, d.edges);
    auto v = focus_subgraph(g, d.root);
    for (auto x : v.members())
      for (auto [a, k] : ancestor_distances(v, x)) {
        if (tree)
          ASSERT_EQ(concept_distance(v, x, a), k);
        else
          ASSERT_LE(concept_distance(v, x, a), k);
      }
  }
}

TEST(ConceptDistance, ShortcutBeatsAncestorChain) {
  // y -> p -> q -> x is three hops, but y -> c and x -> c give 2.
  auto g = build_hierarchy({C(1), C(2), C(3), C(4), C(5)},
                           {{C(1), C(2)}, {C(2), C(3)}, {C(3), C(4)}, {C(1), C(5)}, {C(4), C(5)}});
  auto v = focus_subgraph(g, C(5));
  EXPECT_EQ(ancestor_distances(v, C(1)).at(C(4)), 3u);
  EXPECT_EQ(concept_distance(v, C(1), C(4)), 2u);
  EXPECT_EQ(lowest_common_ancestor(v, C(1), C(4)).witness, C(5));
}

TEST_F(RandomDagTest, AddingAnEdgeNeverIncreasesDistance) {
  for (int round = 0; round < 200; ++round) {
    auto d = testing::random_dag(rng, 25);
    // An edge from a later to an earlier node keeps the order topological.
    std::uniform_int_distribution<std::size_t> pick(1, d.concepts.size() - 1);
    const std::size_t k = pick(rng);
    std::uniform_int_distribution<std::size_t> parent(0, k - 1);
    auto more = d.edges;
    more.push_back({d.concepts[k], d.concepts[parent(rng)]});
    auto g1 = build_hierarchy(d.concepts, d.edges);
    auto g2 = build_hierarchy(d.concepts, more);
    auto v1 = focus_subgraph(g1, d.root);
    auto v2 = focus_subgraph(g2, d.root);
    DistanceCache c1(v1), c2(v2);
    for (auto x : v1.members())
      for (auto y : v1.members()) ASSERT_LE(c2.distance(x, y), c1.distance(x, y));
  }
}

TEST_F(RandomDagTest, RemovingNonMembersLeavesDistancesUnchanged) {
  for (int round = 0; round < 100; ++round) {
    auto d = testing::random_dag(rng, 40);
    const ConceptId root = d.concepts[1];
    auto g = build_hierarchy(d.concepts, d.edges);
    auto v = focus_subgraph(g, root);
    const auto members = v.members();
    std::vector<Edge> inner;
    for (const Edge& e : d.edges)
      if (v.contains(e.child) && v.contains(e.parent)) inner.push_back(e);
    auto g2 = build_hierarchy(members, inner);
    auto v2 = focus_subgraph(g2, root);
    DistanceCache c1(v), c2(v2);
    for (auto x : members)
      for (auto y : members) ASSERT_EQ(c1.distance(x, y), c2.distance(x, y));
  }
}

TEST_F(RandomDagTest, TransitiveReductionIsIdempotentAndKeepsReachability) {
  for (int round = 0; round < 100; ++round) {
    auto d = testing::random_dag(rng, 30);
    auto g = build_hierarchy(d.concepts, d.edges);
    auto r = transitive_reduction(g);
    EXPECT_EQ(transitive_reduction(r), r);
    auto v = focus_subgraph(g, d.root);
    auto rv = focus_subgraph(r, d.root);
    for (auto x : v.members()) {
      auto a = ancestor_distances(v, x);
      auto b = ancestor_distances(rv, x);
      ASSERT_EQ(a.size(), b.size());
      for (auto [c, _] : a) ASSERT_TRUE(b.count(c));
    }
  }
}

}  // namespace
}  // namespace codedist
