#include <catch2/catch_amalgamated.hpp>

#include <map>
#include <set>

#include "bvp/physical.hpp"

using namespace bvp;

namespace {

Ballot make_ballot(int k, Layout layout = Layout::BinaryTwoColumn, double weight = 4.0) {
    Ballot b;
    b.serial = 0;
    b.design.arity = k;
    b.design.layout = layout;
    b.design.nominal_weight = weight;
    b.weight = weight;
    return b;
}

Stamp make_stamp(PatternId pattern, bool common = false, int charges = 3) {
    Stamp s;
    s.secret = VisualSecret{pattern, 0.05, 0.01};
    s.common_mark = common;
    s.charges = charges;
    return s;
}

}  // namespace

TEST_CASE("rotation group maps choices to cells") {
    BallotDesign binary{2, Layout::BinaryTwoColumn, 4.0};
    CHECK(cell_for_choice(binary, 0, 0) == 0);
    CHECK(cell_for_choice(binary, 1, 0) == 1);
    BallotDesign five{5, Layout::KGon, 4.0};
    CHECK(cell_for_choice(five, 3, 4) == 2);

    BallotDesign three{3, Layout::KGon, 4.0};
    CHECK(choice_for_cell(three, 2, 0) == 1);
    CHECK(choice_for_cell(binary, 0, 1) == 1);

    CHECK_THROWS_AS(cell_for_choice(binary, 0, 2), SimError);
    CHECK_THROWS_AS(choice_for_cell(binary, 0, -1), SimError);
}

TEST_CASE("rotation round trip is exact for every arity") {
    for (int k = 2; k <= 6; ++k) {
        BallotDesign d{k, k == 2 ? Layout::BinaryTwoColumn : Layout::KGon, 4.0};
        for (int r = 0; r < k; ++r)
            for (int c = 0; c < k; ++c)
                CHECK(choice_for_cell(d, r, cell_for_choice(d, r, c)) == c);
    }
}

TEST_CASE("fold hides the labels and is permanent") {
    Ballot b = make_ballot(2);
    CHECK(observer_view(b).labels_visible);
    Ballot folded = fold(b);
    CHECK(folded.folded);
    CHECK_FALSE(observer_view(folded).labels_visible);
    CHECK_THROWS_AS(fold(folded), SimError);
    try {
        fold(folded);
    } catch (const SimError& e) {
        CHECK(e.code() == Err::AlreadyFolded);
    }
}

TEST_CASE("rotate composes modulo k and requires a fold") {
    Ballot b = fold(make_ballot(2));
    auto r1 = rotate(b, 1, true);
    CHECK(r1.ballot.orientation == 1);
    CHECK_FALSE(r1.orientation_observable);

    Ballot six = fold(make_ballot(6, Layout::KGon));
    six.orientation = 3;
    CHECK(rotate(six, 5, true).ballot.orientation == 2);

    Ballot unfolded = make_ballot(2);
    CHECK_THROWS_AS(rotate(unfolded, 1, true), SimError);
    // Lenient mode lets the sloppy rotation happen but flags the label leak.
    auto leak = rotate(unfolded, 1, true, /*strict=*/false);
    CHECK(leak.label_leak);
    CHECK(leak.ballot.orientation == 1);

    auto open = rotate(b, 1, /*concealed=*/false);
    CHECK(open.orientation_observable);
}

TEST_CASE("marks freeze the orientation") {
    Ballot b = fold(make_ballot(2));
    Stamp s = make_stamp(7);
    b = imprint(b, 1, 0, s);
    CHECK_THROWS_AS(rotate(b, 1, true), SimError);
}

TEST_CASE("imprint lays the secret and spends a charge") {
    Ballot b = fold(make_ballot(2));
    Stamp s = make_stamp(7);
    b = imprint(b, 1, 0, s);
    REQUIRE(b.marks.size() == 1);
    CHECK(b.marks[0].cell == 1);
    CHECK(b.marks[0].ink == Ink::Invisible);
    CHECK(b.marks[0].pattern == 7);
    CHECK(s.charges == 2);

    Stamp dry = make_stamp(8, false, 0);
    CHECK_THROWS_AS(imprint(b, 0, 0, dry), SimError);
    try {
        imprint(b, 0, 0, dry);
    } catch (const SimError& e) {
        CHECK(e.code() == Err::DryStamp);
    }
    CHECK_THROWS_AS(imprint(b, 5, 0, s), SimError);

    Ballot open = make_ballot(2);
    CHECK_THROWS_AS(imprint(open, 0, 0, s), SimError);
}

TEST_CASE("imprint with a common-mark stamp leaves disk plus secret") {
    Ballot b = fold(make_ballot(2, Layout::ParallelSplit));
    Stamp s = make_stamp(9, /*common=*/true);
    b = imprint(b, 1, 0, s);
    REQUIRE(b.marks.size() == 2);
    CHECK(b.marks[0].ink == Ink::Visible);
    CHECK_FALSE(b.marks[0].is_secret());
    CHECK(b.marks[1].ink == Ink::Invisible);
    CHECK(b.marks[1].pattern == 9);

    // A feinted imprint presses nothing and spends nothing.
    int before = s.charges;
    Ballot same = imprint(b, 1, 1, s, /*feint=*/true);
    CHECK(same.marks.size() == b.marks.size());
    CHECK(s.charges == before);
}

TEST_CASE("cut_parallel splits matching columns into twin halves") {
    Ballot b = fold(make_ballot(2, Layout::ParallelSplit));
    Stamp s = make_stamp(11, true, 4);
    b = imprint(b, 1, 0, s);
    b = imprint(b, 1, 1, s);
    auto [left, right] = cut_parallel(b, 10, 11);
    CHECK(left.serial == 10);
    CHECK(right.serial == 11);
    CHECK(left.twin == 11);
    CHECK(right.twin == 10);
    CHECK(left.half_column == 0);
    CHECK(right.half_column == 1);
    CHECK(left.weight == Catch::Approx(b.weight / 2));

    std::vector<Ballot> halves{left, right};
    reveal_ink(halves, Phase::CountVerify);
    REQUIRE(decode(halves[0]).has_value());
    CHECK(decode(halves[0]) == decode(halves[1]));
}

TEST_CASE("cut_parallel rejects mismatched or missing visible rows") {
    Ballot b = fold(make_ballot(2, Layout::ParallelSplit));
    Stamp s = make_stamp(12, true, 4);
    b = imprint(b, 0, 0, s);
    b = imprint(b, 1, 1, s);
    CHECK_THROWS_AS(cut_parallel(b, 10, 11), SimError);
    try {
        cut_parallel(b, 10, 11);
    } catch (const SimError& e) {
        CHECK(e.code() == Err::ColumnsMismatch);
    }

    Ballot plain = fold(make_ballot(2));
    CHECK_THROWS_AS(cut_parallel(plain, 10, 11), SimError);

    Ballot unmarked = fold(make_ballot(2, Layout::ParallelSplit));
    CHECK_THROWS_AS(cut_parallel(unmarked, 10, 11), SimError);
}

TEST_CASE("a feinted second imprint passes the cut but differs at reveal") {
    // The visible disks match, so the room waves the cut through; only the
    // revealing ink shows one half carries no secret.
    Ballot b = fold(make_ballot(2, Layout::ParallelSplit));
    Stamp disk;
    disk.common_mark = true;
    disk.charges = 8;
    b = imprint(b, 1, 0, disk);
    b = imprint(b, 1, 1, disk);
    Stamp secret = make_stamp(13, false, 4);
    b = imprint(b, 1, 0, secret);
    b = imprint(b, 1, 1, secret, /*feint=*/true);

    auto [cast_half, receipt_half] = cut_parallel(b, 10, 11);
    std::vector<Ballot> halves{cast_half, receipt_half};
    reveal_ink(halves, Phase::CountVerify);
    CHECK(decode(halves[0]).has_value());
    CHECK_FALSE(decode(halves[1]).has_value());  // spoiled: disk with no secret
}

TEST_CASE("bag draws exhaust to a permutation and reject when empty") {
    Rng rng(7);
    Bag<int> bag({0, 1, 2, 3, 4});
    std::set<int> seen;
    for (int i = 0; i < 5; ++i) seen.insert(bag.draw(rng));
    CHECK(seen == std::set<int>{0, 1, 2, 3, 4});
    CHECK(bag.empty());
    CHECK_THROWS_AS(bag.draw(rng), SimError);
}

TEST_CASE("bag first draws are uniform (chi-squared, 10000 draws)") {
    // 5 items, df 4; the 0.999 quantile of chi-squared(4) is 18.467.
    Rng rng(123);
    std::map<int, int> counts;
    for (int t = 0; t < 10000; ++t) {
        Bag<int> bag({0, 1, 2, 3, 4});
        ++counts[bag.draw(rng)];
    }
    double chi2 = 0.0;
    for (int item = 0; item < 5; ++item) {
        double expected = 2000.0;
        double diff = counts[item] - expected;
        chi2 += diff * diff / expected;
    }
    CHECK(chi2 < 18.467);
}

TEST_CASE("scale flags casts that deviate by more than the tolerance") {
    BallotBoxState box;
    box.scale_tolerance = 1.0;

    Ballot one = make_ballot(2);
    CHECK_FALSE(cast_into(box, one, 0, 4.0).has_value());
    CHECK(box.contents.size() == 1);
    CHECK(box.scale_readings.back() == Catch::Approx(4.0));

    Ballot extra = make_ballot(2);
    auto detected = cast_into(box, std::vector<const Ballot*>{&one, &extra}, 1, 4.0);
    REQUIRE(detected.has_value());
    CHECK(detected->voter == 1);
    CHECK(detected->delta_grams == Catch::Approx(8.0));
    CHECK(box.scale_readings.back() == Catch::Approx(12.0));

    BallotBoxState sloppy;
    sloppy.scale_tolerance = 5.0;  // misconfigured scale misses the double cast
    CHECK_FALSE(cast_into(sloppy, std::vector<const Ballot*>{&one, &extra}, 1, 4.0).has_value());
}

TEST_CASE("scale soundness holds whenever tolerance and jitter are sane") {
    // tolerance < nominal/2 and jitter <= tolerance/4: every double cast is
    // caught and no single cast is flagged.
    Rng rng(99);
    for (int trial = 0; trial < 200; ++trial) {
        double nominal = rng.uniform(2.0, 10.0);
        double tolerance = rng.uniform(0.2, nominal / 2.0 * 0.99);
        double jitter = rng.uniform(0.0, tolerance / 4.0);
        BallotBoxState box;
        box.scale_tolerance = tolerance;
        Ballot a = make_ballot(2, Layout::BinaryTwoColumn, nominal + rng.uniform(-jitter, jitter));
        Ballot b = make_ballot(2, Layout::BinaryTwoColumn, nominal + rng.uniform(-jitter, jitter));
        CHECK_FALSE(cast_into(box, a, 0, nominal).has_value());
        CHECK(cast_into(box, std::vector<const Ballot*>{&a, &b}, 1, nominal).has_value());
    }
}

TEST_CASE("revealing ink is phase-gated and monotonic") {
    Ballot b = fold(make_ballot(2));
    Stamp s = make_stamp(21);
    b = imprint(b, 0, 0, s);
    std::vector<Ballot> ballots{b};

    CHECK_THROWS_AS(reveal_ink(ballots, Phase::MarkCast), SimError);
    try {
        reveal_ink(ballots, Phase::MarkCast);
    } catch (const SimError& e) {
        CHECK(e.code() == Err::WrongPhase);
    }

    reveal_ink(ballots, Phase::CountVerify);
    CHECK(ballots[0].marks[0].ink == Ink::Revealed);
    reveal_ink(ballots, Phase::CountVerify);  // idempotent, never goes back
    CHECK(ballots[0].marks[0].ink == Ink::Revealed);
}

TEST_CASE("decode reads exactly one secret row or calls the ballot spoiled") {
    Ballot b = fold(make_ballot(3, Layout::KGon));
    b.orientation = 2;
    Stamp s = make_stamp(31, false, 6);
    b = imprint(b, 0, 0, s);
    std::vector<Ballot> v{b};
    reveal_ink(v, Phase::CountVerify);
    CHECK(decode(v[0]) == 1);  // (0 - 2) mod 3

    Ballot empty = fold(make_ballot(3, Layout::KGon));
    CHECK_FALSE(decode(empty).has_value());

    Ballot twice = fold(make_ballot(3, Layout::KGon));
    twice = imprint(twice, 0, 0, s);
    twice = imprint(twice, 1, 0, s);
    std::vector<Ballot> w{twice};
    reveal_ink(w, Phase::CountVerify);
    CHECK_FALSE(decode(w[0]).has_value());  // over-marked
}

TEST_CASE("observer view hides invisible marks and non-inspection defects") {
    Ballot b = fold(make_ballot(2));
    Stamp s = make_stamp(41, true, 4);
    b = imprint(b, 1, 0, s);
    b.defects.push_back(Defect{DefectKind::Pinhole, 0, 3, 0});

    auto view = observer_view(b);
    REQUIRE(view.visible_marks.size() == 1);  // the disk, not the secret
    CHECK_FALSE(view.visible_marks[0].is_secret());
    CHECK(view.visible_defects.empty());

    auto inspection = observer_view(b, /*inspection=*/true);
    CHECK(inspection.visible_defects.size() == 1);
}

TEST_CASE("design validation enforces the arity bound") {
    BallotDesign seven{7, Layout::KGon, 4.0};
    CHECK_THROWS_AS(validate_design(seven), SimError);
    BallotDesign one{1, Layout::KGon, 4.0};
    CHECK_THROWS_AS(validate_design(one), SimError);
    BallotDesign ok{6, Layout::KGon, 4.0};
    CHECK_NOTHROW(validate_design(ok));
}
