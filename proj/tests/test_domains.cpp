#include "oracles.hpp"

#include <lmdp/domains.hpp>
#include <lmdp/error.hpp>

#include <gtest/gtest.h>

#include <complex>
#include <numbers>
#include <random>

using namespace lmdp;

namespace {

ErrorCode code_of(auto&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no error raised";
    return ErrorCode::Overflow;
}

} // namespace

TEST(Ring, SmallestRing) {
    const RingDomain r = make_ring(RingSpec{.n_states = 3, .spacing = 2});
    EXPECT_EQ(r.lmdp.n_interior(), 3);
    EXPECT_EQ(r.tasks.cols(), 3);
    EXPECT_EQ(r.layer_sizes, (std::vector<Index>{3, 2}));
    EXPECT_EQ(code_of([] { make_ring(RingSpec{.n_states = 2}); }), ErrorCode::InvalidSpec);
}

TEST(Ring, LayerArithmetic) {
    EXPECT_EQ(ring_layer_sizes(27, 3), (std::vector<Index>{27, 9, 3}));
    EXPECT_EQ(ring_layer_sizes(256, 6), (std::vector<Index>{256, 43, 8, 2}));
    EXPECT_EQ(ring_layer_sizes(27, 3, 2), (std::vector<Index>{27, 9}));
    EXPECT_EQ(default_spacing(16), 3);
    EXPECT_EQ(default_spacing(256), 6);
    EXPECT_EQ(make_ring(RingSpec{.n_states = 27, .spacing = 3}).levels.size(), 2u);
}

TEST(Ring, LocalSupport) {
    const RingDomain r = make_ring(RingSpec{.n_states = 12});
    for (Index s = 0; s < 12; ++s) {
        std::vector<Index> rows;
        for (SparseMatrix::InnerIterator it(r.lmdp.P_i(), s); it; ++it) rows.push_back(it.row());
        std::vector<Index> expect{(s + 11) % 12, s, (s + 1) % 12};
        std::sort(expect.begin(), expect.end());
        EXPECT_EQ(rows, expect);
        EXPECT_EQ(r.lmdp.P_b().col(s).nonZeros(), 1);
        EXPECT_DOUBLE_EQ(r.lmdp.P_b().coeff(s, s), 0.2);
    }
}

TEST(Ring, RotationSymmetry) {
    const RingDomain r = make_ring(RingSpec{.n_states = 16});
    const Matrix P = Matrix(r.lmdp.P_i());
    Eigen::PermutationMatrix<Eigen::Dynamic> rot(16);
    for (Index s = 0; s < 16; ++s) rot.indices()[s] = static_cast<int>((s + 1) % 16);
    const Matrix conj = rot * P * rot.transpose();
    EXPECT_LE((conj - P).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Corridor, EndsReflectInsteadOfWrapping) {
    const RingDomain c = make_corridor(RingSpec{.n_states = 9, .spacing = 3});
    EXPECT_EQ(c.lmdp.P_i().coeff(8, 0), 0.0);
    EXPECT_NEAR(c.lmdp.P_i().coeff(0, 0), 2.0 / 3.0 - 0.2, 1e-15);
}

TEST(FourRooms, ConnectedWithDoorSubtasks) {
    const GridSpec spec = four_rooms_spec(11);
    const GridDomain g = make_four_rooms(spec, {spec.doors.begin(), spec.doors.end()});
    EXPECT_EQ(g.lmdp.n_interior(), 121 - 17 - 1);
    EXPECT_EQ(g.subtasks.n_subtasks(), 4);
    const AugmentedMlmdp aug = augment(Mlmdp{std::make_shared<const Lmdp>(g.lmdp), g.Q_b}, g.subtasks, -5.0);
    const HigherDynamics hd = derive_higher_layer(aug);
    EXPECT_LE(max_column_deviation(hd.P_i, hd.P_b), 1e-10);
    EXPECT_EQ(four_rooms_subtasks(spec).size(), 20u);
}

TEST(FourRooms, GoalOnWall) {
    GridSpec spec = four_rooms_spec(11);
    spec.goal_cells = {{5, 0}};
    EXPECT_EQ(code_of([&] { make_four_rooms(spec, {}); }), ErrorCode::BlockedCell);
    EXPECT_EQ(code_of([] { make_four_rooms(four_rooms_spec(11), {{5, 5}}); }), ErrorCode::BlockedCell);
}

TEST(FourRooms, OpenRoomIsPlainGrid) {
    GridSpec spec;
    spec.width = 4;
    spec.height = 3;
    spec.goal_cells = {{2, 3}};
    const GridDomain g = make_four_rooms(spec, {});
    EXPECT_EQ(g.lmdp.n_interior(), 11);
    const Index corner = g.index_of({0, 0});
    EXPECT_NEAR(g.lmdp.P_i().coeff(corner, corner), 0.6, 1e-15);
    const Index mid = g.index_of({1, 1});
    EXPECT_NEAR(g.lmdp.P_i().coeff(mid, mid), 0.2, 1e-15);
    EXPECT_EQ(oracle::support_distance(g.lmdp, corner), 5);
}

TEST(FourRooms, ReflectionSymmetry) {
    GridSpec spec = four_rooms_spec(11);
    spec.goal_cells = {{10, 10}};
    const GridDomain g = make_four_rooms(spec, {});
    const Index n = g.lmdp.n_interior();
    Eigen::PermutationMatrix<Eigen::Dynamic> perm(n);
    for (Index k = 0; k < n; ++k) {
        const Cell c = g.interior_cells[static_cast<std::size_t>(k)];
        perm.indices()[k] = static_cast<int>(g.index_of({c.second, c.first}));
    }
    const Matrix P = Matrix(g.lmdp.P_i());
    EXPECT_LE((perm * P * perm.transpose() - P).cwiseAbs().maxCoeff(), 1e-12);
    const Matrix B = Matrix(g.lmdp.P_b());
    EXPECT_LE((B * perm.transpose() - B).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Grid, ParseAndRender) {
    const std::string map = "#####\n#..G#\n#S#.#\n#...#\n#####\n";
    const ParsedGrid p = parse_grid(map);
    EXPECT_EQ(p.spec.width, 5);
    EXPECT_EQ(p.spec.goal_cells, (std::vector<Cell>{{1, 3}}));
    EXPECT_EQ(p.subtasks, (std::vector<Cell>{{2, 1}}));
    EXPECT_EQ(render_grid(p.spec, p.subtasks), map);
    EXPECT_EQ(code_of([] { parse_grid("##\n#\n"); }), ErrorCode::ParseError);
    EXPECT_EQ(code_of([] { parse_grid("#x\n"); }), ErrorCode::ParseError);
    const GridDomain g = make_four_rooms(p.spec, p.subtasks);
    EXPECT_EQ(g.lmdp.n_interior(), 7);
}

TEST(Arm, ForwardKinematics) {
    const auto [x, y] = end_effector(1.0, 0.7, 0.0, 0.0);
    EXPECT_DOUBLE_EQ(x, 1.7);
    EXPECT_DOUBLE_EQ(y, 0.0);
    std::mt19937_64 g(13);
    std::uniform_real_distribution<double> u(-std::numbers::pi, std::numbers::pi);
    for (int k = 0; k < 100; ++k) {
        const double a1 = u(g), a2 = u(g);
        const std::complex<double> e = 1.3 * std::polar(1.0, a1) + 0.8 * std::polar(1.0, a1 + a2);
        const auto [ex, ey] = end_effector(1.3, 0.8, a1, a2);
        EXPECT_NEAR(ex, e.real(), 1e-12);
        EXPECT_NEAR(ey, e.imag(), 1e-12);
    }
    EXPECT_NEAR(joint_angle(0, 4), -0.75 * std::numbers::pi, 1e-15);
}

TEST(Arm, WholePlaneTargetBlendsUniformly) {
    ArmSpec spec;
    spec.bins = 7;
    spec.target = {-10, 10, -10, 10};
    const ArmDomain arm = make_arm(spec);
    EXPECT_TRUE(arm.target_q.isOnes());
    const TaskWeights w = blend_weights(arm.basis, arm.target_q);
    EXPECT_LE((w.w.maxCoeff() - w.w.minCoeff()) / w.w.maxCoeff(), 1e-9);
}

TEST(Arm, RectangleBlendIsOptimal) {
    const ArmDomain arm = make_arm(ArmSpec{});
    EXPECT_EQ(arm.lmdp.n_interior(), 289);
    const auto sol = solve_novel_task(arm.basis, arm.target_q);
    const Lmdp L = arm.lmdp.with_boundary_rewards(arm.target_q.array().log().matrix());
    const Vector ref = solve_direct(L).z_i;
    EXPECT_LE((sol.z.z_i - ref).cwiseAbs().maxCoeff(), 1e-9 * ref.cwiseAbs().maxCoeff());
}

TEST(Arm, TargetMissingWorkspace) {
    ArmSpec spec;
    spec.target = {5, 6, 5, 6};
    EXPECT_EQ(code_of([&] { make_arm(spec); }), ErrorCode::EmptyTarget);
    spec.bins = 2;
    EXPECT_EQ(code_of([&] { make_arm(spec); }), ErrorCode::InvalidSpec);
}

TEST(Domains, AllPassValidation) {
    EXPECT_NO_THROW(make_ring(RingSpec{.n_states = 50}));
    EXPECT_NO_THROW(make_corridor(RingSpec{.n_states = 50}));
    EXPECT_NO_THROW(make_four_rooms(four_rooms_spec(15), four_rooms_subtasks(four_rooms_spec(15))));
    EXPECT_NO_THROW(make_arm(ArmSpec{.bins = 9}));
}
