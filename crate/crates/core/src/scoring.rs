//! Beta factor estimation from qualitative sub-factor grades.
//!
//! Two partial-beta schemes are provided. The additive scheme grades eight
//! defensive sub-factors on a letter scale, looks each grade up in a
//! weighted count table, and divides the summed counts by a fixed
//! denominator. Separate tables exist for hardware and software failure
//! domains; the software table widens the beta range to 0.001–0.999 and
//! weights diversity-related defenses more heavily. The multiplicative
//! scheme ([`beta_pbf1`]) simply multiplies a list of partial betas and is
//! kept for comparison: a single near-zero factor dominates the product, so
//! it tends to underpredict dependent failure.
//!
//! All table arithmetic is exact: counts are integers and the resulting
//! beta is carried as a rational alongside its decimal value.

use std::fmt;

use crate::model::Domain;

/// Letter grade for one sub-factor, ordered from poor defense (`A`) to
/// ideal defense (`E`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Grade {
    A,
    APlus,
    B,
    BPlus,
    C,
    D,
    E,
}

impl Grade {
    pub const ALL: [Grade; 7] = [
        Grade::A,
        Grade::APlus,
        Grade::B,
        Grade::BPlus,
        Grade::C,
        Grade::D,
        Grade::E,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Grade::A => "A",
            Grade::APlus => "A+",
            Grade::B => "B",
            Grade::BPlus => "B+",
            Grade::C => "C",
            Grade::D => "D",
            Grade::E => "E",
        }
    }

    pub fn parse(s: &str) -> Option<Grade> {
        match s.trim() {
            "A" => Some(Grade::A),
            "A+" => Some(Grade::APlus),
            "B" => Some(Grade::B),
            "B+" => Some(Grade::BPlus),
            "C" => Some(Grade::C),
            "D" => Some(Grade::D),
            "E" => Some(Grade::E),
            _ => None,
        }
    }

    fn index(&self) -> usize {
        *self as usize
    }
}

impl fmt::Display for Grade {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One of the eight qualitative defenses against common cause failure.
///
/// `Separation` reads as physical separation in the hardware table and as
/// input similarity in the software table: physical separation only matters
/// to software insofar as it changes the operational conditions the
/// redundant copies see, so the software table grades how far the copies
/// share external inputs instead (see [`input_similarity_grade`]).
/// `Redundancy` covers redundancy and diversity; for software it grades the
/// degree of internal diversity across the group. `Tests` covers
/// operational testing in the software reading.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SubFactor {
    Redundancy,
    Separation,
    Understanding,
    Analysis,
    Mmi,
    SafetyCulture,
    Control,
    Tests,
}

impl SubFactor {
    /// Canonical ordering used by grade-sheet listings and the table dump.
    pub const ALL: [SubFactor; 8] = [
        SubFactor::Redundancy,
        SubFactor::Separation,
        SubFactor::Understanding,
        SubFactor::Analysis,
        SubFactor::Mmi,
        SubFactor::SafetyCulture,
        SubFactor::Control,
        SubFactor::Tests,
    ];

    /// Row label as printed in the given domain's table.
    pub fn label(&self, domain: Domain) -> &'static str {
        match (self, domain) {
            (SubFactor::Redundancy, _) => "Redundancy (& Diversity)",
            (SubFactor::Separation, Domain::Hardware) => "Separation",
            (SubFactor::Separation, Domain::Software) => "Input Similarity",
            (SubFactor::Understanding, _) => "Understanding",
            (SubFactor::Analysis, _) => "Analysis",
            (SubFactor::Mmi, _) => "MMI",
            (SubFactor::SafetyCulture, _) => "Safety Culture",
            (SubFactor::Control, _) => "Control",
            (SubFactor::Tests, _) => "Tests",
        }
    }

    /// Short key used in model files and reports.
    pub fn key(&self) -> &'static str {
        match self {
            SubFactor::Redundancy => "redundancy",
            SubFactor::Separation => "separation",
            SubFactor::Understanding => "understanding",
            SubFactor::Analysis => "analysis",
            SubFactor::Mmi => "mmi",
            SubFactor::SafetyCulture => "safety-culture",
            SubFactor::Control => "control",
            SubFactor::Tests => "tests",
        }
    }

    fn index(&self) -> usize {
        *self as usize
    }
}

/// A grade-lookup failure: the requested cell is blank in the table, which
/// signals an invalid grade assignment rather than a zero weight.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("no {domain} table cell for {sub_factor:?} at grade {grade}; that grade is not assignable")]
pub struct MissingCell {
    pub domain: Domain,
    pub sub_factor: SubFactor,
    pub grade: Grade,
}

/// Weighted count table for one failure domain: eight sub-factor rows by
/// seven grade columns, with blanks where a grade is not assignable, plus
/// the denominator that turns a summed row selection into a beta.
#[derive(Debug, Clone)]
pub struct ScoringTable {
    pub domain: Domain,
    cells: [[Option<u32>; 7]; 8],
    pub denominator: u32,
}

// Rows in SubFactor::ALL order; columns A, A+, B, B+, C, D, E.
const HARDWARE_CELLS: [[Option<u32>; 7]; 8] = [
    [Some(1800), Some(882), Some(433), Some(212), Some(104), Some(25), Some(6)],
    [Some(2400), None, Some(577), None, Some(139), Some(33), Some(8)],
    [Some(1800), None, Some(433), None, Some(104), Some(25), Some(6)],
    [Some(1800), None, Some(433), None, Some(104), Some(25), Some(6)],
    [Some(3000), None, Some(721), None, Some(173), Some(42), Some(10)],
    [Some(1500), None, Some(360), None, Some(87), Some(21), Some(5)],
    [Some(1800), None, Some(433), None, Some(104), Some(25), Some(6)],
    [Some(1200), None, Some(288), None, Some(69), Some(17), Some(4)],
];

const SOFTWARE_CELLS: [[Option<u32>; 7]; 8] = [
    [Some(23976), Some(10112), Some(4265), Some(1799), Some(759), Some(135), Some(24)],
    [Some(23976), Some(10112), Some(4265), None, Some(759), Some(135), Some(24)],
    [Some(7992), None, Some(1422), None, Some(253), Some(45), Some(8)],
    [Some(7992), None, Some(1422), None, Some(253), Some(45), Some(8)],
    [Some(11988), None, Some(2132), None, Some(379), Some(67), Some(12)],
    [Some(6993), None, Some(1244), None, Some(221), Some(39), Some(7)],
    [Some(4995), None, Some(888), None, Some(158), Some(28), Some(5)],
    [Some(11988), None, Some(2132), None, Some(379), Some(67), Some(12)],
];

pub const HARDWARE_TABLE: ScoringTable = ScoringTable {
    domain: Domain::Hardware,
    cells: HARDWARE_CELLS,
    denominator: 51_000,
};

pub const SOFTWARE_TABLE: ScoringTable = ScoringTable {
    domain: Domain::Software,
    cells: SOFTWARE_CELLS,
    denominator: 100_000,
};

/// The embedded table for a failure domain.
pub fn table_for(domain: Domain) -> &'static ScoringTable {
    match domain {
        Domain::Hardware => &HARDWARE_TABLE,
        Domain::Software => &SOFTWARE_TABLE,
    }
}

impl ScoringTable {
    /// Verbatim count for one cell, or [`MissingCell`] for a blank column.
    pub fn lookup(&self, sub_factor: SubFactor, grade: Grade) -> Result<u32, MissingCell> {
        self.cells[sub_factor.index()][grade.index()].ok_or(MissingCell {
            domain: self.domain,
            sub_factor,
            grade,
        })
    }

    /// Whether the cell is assignable at all.
    pub fn has_cell(&self, sub_factor: SubFactor, grade: Grade) -> bool {
        self.cells[sub_factor.index()][grade.index()].is_some()
    }

    /// Row of raw counts (blanks as `None`) in grade order, for audit dumps.
    pub fn row(&self, sub_factor: SubFactor) -> [Option<u32>; 7] {
        self.cells[sub_factor.index()]
    }

    /// Sum of one grade column over all rows that have that grade.
    pub fn column_sum(&self, grade: Grade) -> u32 {
        self.cells.iter().filter_map(|row| row[grade.index()]).sum()
    }
}

/// Verbatim table count for `(domain, sub_factor, grade)`.
pub fn lookup_count(domain: Domain, sub_factor: SubFactor, grade: Grade) -> Result<u32, MissingCell> {
    table_for(domain).lookup(sub_factor, grade)
}

/// The eight sub-factor grades assigned to one group in one failure domain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GradeSheet {
    pub domain: Domain,
    grades: [Grade; 8],
}

impl GradeSheet {
    /// Build a sheet from grades listed in [`SubFactor::ALL`] order.
    pub fn new(domain: Domain, grades: [Grade; 8]) -> Self {
        GradeSheet { domain, grades }
    }

    /// A sheet assigning the same grade to every sub-factor.
    pub fn uniform(domain: Domain, grade: Grade) -> Self {
        GradeSheet { domain, grades: [grade; 8] }
    }

    pub fn grade(&self, sub_factor: SubFactor) -> Grade {
        self.grades[sub_factor.index()]
    }

    pub fn grades(&self) -> [Grade; 8] {
        self.grades
    }

    /// Replace one grade, returning the modified sheet.
    pub fn with_grade(&self, sub_factor: SubFactor, grade: Grade) -> Self {
        let mut grades = self.grades;
        grades[sub_factor.index()] = grade;
        GradeSheet { domain: self.domain, grades }
    }

    /// First blank cell this sheet would hit in its domain table, if any.
    pub fn invalid_cell(&self) -> Option<MissingCell> {
        let table = table_for(self.domain);
        SubFactor::ALL
            .iter()
            .find(|sf| !table.has_cell(**sf, self.grade(**sf)))
            .map(|sf| MissingCell {
                domain: self.domain,
                sub_factor: *sf,
                grade: self.grade(*sf),
            })
    }
}

/// A beta factor carried as the exact rational `sum / denominator` from
/// which its decimal value is derived.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BetaScore {
    pub sum: u32,
    pub denominator: u32,
}

impl BetaScore {
    pub fn value(&self) -> f64 {
        f64::from(self.sum) / f64::from(self.denominator)
    }
}

impl fmt::Display for BetaScore {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.sum, self.denominator)
    }
}

/// Additive partial-beta estimate: sum the eight graded table counts and
/// divide by the table denominator. Integer arithmetic throughout; the
/// exact rational is returned so reports can reproduce the decimal to full
/// precision.
pub fn beta_pbf2(sheet: &GradeSheet) -> Result<BetaScore, MissingCell> {
    let table = table_for(sheet.domain);
    let mut sum = 0u32;
    for sf in SubFactor::ALL {
        sum += table.lookup(sf, sheet.grade(sf))?;
    }
    Ok(BetaScore { sum, denominator: table.denominator })
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Pbf1Error {
    #[error("partial beta list is empty")]
    Empty,
    #[error("partial beta {value} at position {index} is outside (0, 1]")]
    OutOfRange { index: usize, value: f64 },
}

/// Multiplicative partial-beta estimate: the product of all partial betas.
///
/// The list length is not fixed. Each factor must lie in `(0, 1]`; a zero
/// would claim a perfect defense and force the product to zero. Note the
/// dominance problem with this scheme: one small factor swamps any number
/// of near-one factors (eighteen 0.99s and one 0.1 yield 0.083), so a
/// system graded poorly on almost every defense can still come out with a
/// low beta.
pub fn beta_pbf1(partial_betas: &[f64]) -> Result<f64, Pbf1Error> {
    if partial_betas.is_empty() {
        return Err(Pbf1Error::Empty);
    }
    for (index, &value) in partial_betas.iter().enumerate() {
        if !(value > 0.0 && value <= 1.0) {
            return Err(Pbf1Error::OutOfRange { index, value });
        }
    }
    Ok(partial_betas.iter().product())
}

/// Degree of input-source diversity across a group, used by the input
/// similarity guide.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Diversity {
    Zero,
    Partial,
    Complete,
}

impl Diversity {
    pub fn as_str(&self) -> &'static str {
        match self {
            Diversity::Zero => "zero",
            Diversity::Partial => "partial",
            Diversity::Complete => "complete",
        }
    }

    pub fn parse(s: &str) -> Option<Diversity> {
        match s.trim().to_ascii_lowercase().as_str() {
            "zero" => Some(Diversity::Zero),
            "partial" => Some(Diversity::Partial),
            "complete" => Some(Diversity::Complete),
            _ => None,
        }
    }
}

/// Input layout of a group: `m` components fed by `s` input sources with a
/// stated diversity between the sources.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InputProfile {
    /// Number of components within the group (>= 2).
    pub m: u32,
    /// Number of input sources (>= 1).
    pub s: u32,
    pub diversity: Diversity,
}

/// Grade the `Separation` sub-factor of a software sheet from the group's
/// input layout.
///
/// The input ratio is `R = (s - 1)/m` when `s = 1` (so a single shared
/// source gives `R = 0`) and `R = s/m` otherwise. Buckets: `R = 0` grades
/// `A`; `0 < R <= 0.5` grades `A+`; `0.5 < R < 1` grades `B` with zero
/// diversity and `C` otherwise; `R >= 1` grades `D` with zero or partial
/// diversity and `E` with complete diversity.
///
/// The published guide prints the third bucket as starting at `R = 0.5`,
/// but its own worked example assigns `A+` at exactly `R = 0.5`; the
/// boundary here follows the worked example. All comparisons are done in
/// integer arithmetic on `s` and `m`.
pub fn input_similarity_grade(profile: &InputProfile) -> Grade {
    let InputProfile { m, s, diversity } = *profile;
    debug_assert!(m >= 2 && s >= 1);
    if s == 1 {
        // R = (s - 1)/m = 0
        return Grade::A;
    }
    if s >= m {
        // R >= 1
        return match diversity {
            Diversity::Zero | Diversity::Partial => Grade::D,
            Diversity::Complete => Grade::E,
        };
    }
    if 2 * s <= m {
        // 0 < R <= 0.5
        Grade::APlus
    } else {
        // 0.5 < R < 1
        match diversity {
            Diversity::Zero => Grade::B,
            Diversity::Partial | Diversity::Complete => Grade::C,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Case-study hardware grades in SubFactor::ALL order.
    pub(crate) const CASE_STUDY_HW: [Grade; 8] = [
        Grade::BPlus,
        Grade::E,
        Grade::A,
        Grade::D,
        Grade::C,
        Grade::E,
        Grade::D,
        Grade::C,
    ];

    /// Case-study software grades in SubFactor::ALL order.
    pub(crate) const CASE_STUDY_SW: [Grade; 8] = [
        Grade::A,
        Grade::APlus,
        Grade::A,
        Grade::D,
        Grade::C,
        Grade::E,
        Grade::D,
        Grade::C,
    ];

    #[test]
    fn lookup_matches_published_counts() {
        assert_eq!(lookup_count(Domain::Hardware, SubFactor::Redundancy, Grade::BPlus), Ok(212));
        assert_eq!(lookup_count(Domain::Software, SubFactor::Separation, Grade::APlus), Ok(10112));
        assert_eq!(lookup_count(Domain::Hardware, SubFactor::Tests, Grade::E), Ok(4));
        assert_eq!(lookup_count(Domain::Software, SubFactor::Control, Grade::A), Ok(4995));
    }

    #[test]
    fn blank_cells_are_errors() {
        let err = lookup_count(Domain::Hardware, SubFactor::Separation, Grade::APlus).unwrap_err();
        assert_eq!(err.sub_factor, SubFactor::Separation);
        assert_eq!(err.grade, Grade::APlus);
        // The software input-similarity row has no B+ either.
        assert!(lookup_count(Domain::Software, SubFactor::Separation, Grade::BPlus).is_err());
        assert!(lookup_count(Domain::Hardware, SubFactor::Mmi, Grade::BPlus).is_err());
    }

    #[test]
    fn column_sums_pin_table_limits() {
        assert_eq!(HARDWARE_TABLE.column_sum(Grade::A), 15_300);
        assert_eq!(HARDWARE_TABLE.column_sum(Grade::E), 51);
        assert_eq!(SOFTWARE_TABLE.column_sum(Grade::A), 99_900);
        assert_eq!(SOFTWARE_TABLE.column_sum(Grade::E), 100);
    }

    #[test]
    fn rows_strictly_decrease_toward_e() {
        for table in [&HARDWARE_TABLE, &SOFTWARE_TABLE] {
            for sf in SubFactor::ALL {
                let counts: Vec<u32> = table.row(sf).iter().filter_map(|c| *c).collect();
                for pair in counts.windows(2) {
                    assert!(pair[0] > pair[1], "{:?} row not decreasing in {:?}", sf, table.domain);
                }
            }
        }
    }

    #[test]
    fn beta_pbf2_reproduces_case_study_sheet() {
        let hw = beta_pbf2(&GradeSheet::new(Domain::Hardware, CASE_STUDY_HW)).unwrap();
        assert_eq!(hw, BetaScore { sum: 2317, denominator: 51_000 });
        assert!((hw.value() - 0.045431372549019607).abs() < 1e-15);

        let sw = beta_pbf2(&GradeSheet::new(Domain::Software, CASE_STUDY_SW)).unwrap();
        assert_eq!(sw, BetaScore { sum: 42_918, denominator: 100_000 });
        assert!((sw.value() - 0.42918).abs() < 1e-15);
    }

    #[test]
    fn beta_pbf2_limits() {
        let all_a_hw = beta_pbf2(&GradeSheet::uniform(Domain::Hardware, Grade::A)).unwrap();
        assert_eq!(all_a_hw, BetaScore { sum: 15_300, denominator: 51_000 });
        assert_eq!(all_a_hw.value(), 0.3);

        let all_e_hw = beta_pbf2(&GradeSheet::uniform(Domain::Hardware, Grade::E)).unwrap();
        assert_eq!(all_e_hw.value(), 0.001);

        let all_a_sw = beta_pbf2(&GradeSheet::uniform(Domain::Software, Grade::A)).unwrap();
        assert_eq!(all_a_sw.value(), 0.999);

        let all_e_sw = beta_pbf2(&GradeSheet::uniform(Domain::Software, Grade::E)).unwrap();
        assert_eq!(all_e_sw.value(), 0.001);
    }

    #[test]
    fn beta_pbf2_propagates_missing_cell() {
        let sheet = GradeSheet::new(Domain::Hardware, CASE_STUDY_HW).with_grade(SubFactor::Separation, Grade::APlus);
        let err = beta_pbf2(&sheet).unwrap_err();
        assert_eq!(err.sub_factor, SubFactor::Separation);
        assert_eq!(sheet.invalid_cell(), Some(err));
    }

    #[test]
    fn single_step_grade_improvement_never_raises_beta() {
        // Exhaustive over every sheet reachable from a base grade per row is
        // huge; instead perturb each sub-factor of a spread of base sheets.
        let bases = [
            GradeSheet::uniform(Domain::Hardware, Grade::A),
            GradeSheet::uniform(Domain::Hardware, Grade::C),
            GradeSheet::new(Domain::Hardware, CASE_STUDY_HW),
            GradeSheet::uniform(Domain::Software, Grade::B),
            GradeSheet::new(Domain::Software, CASE_STUDY_SW),
        ];
        for base in bases {
            let table = table_for(base.domain);
            let base_beta = beta_pbf2(&base).unwrap();
            for sf in SubFactor::ALL {
                let current = base.grade(sf);
                for better in Grade::ALL.iter().filter(|g| *g > &current) {
                    if !table.has_cell(sf, *better) {
                        continue;
                    }
                    let improved = beta_pbf2(&base.with_grade(sf, *better)).unwrap();
                    assert!(improved.sum <= base_beta.sum);
                }
                for worse in Grade::ALL.iter().filter(|g| *g < &current) {
                    if !table.has_cell(sf, *worse) {
                        continue;
                    }
                    let worsened = beta_pbf2(&base.with_grade(sf, *worse)).unwrap();
                    assert!(worsened.sum >= base_beta.sum);
                }
            }
        }
    }

    #[test]
    fn beta_pbf1_examples() {
        let mut factors = vec![0.99; 18];
        factors.push(0.1);
        let beta = beta_pbf1(&factors).unwrap();
        assert!((beta - 0.083).abs() < 5e-4, "got {beta}");

        assert_eq!(beta_pbf1(&[0.5]).unwrap(), 0.5);
        assert_eq!(beta_pbf1(&[1.0; 19]).unwrap(), 1.0);
    }

    #[test]
    fn beta_pbf1_rejects_bad_input() {
        assert_eq!(beta_pbf1(&[]), Err(Pbf1Error::Empty));
        assert!(matches!(beta_pbf1(&[0.5, 0.0]), Err(Pbf1Error::OutOfRange { index: 1, .. })));
        assert!(matches!(beta_pbf1(&[1.2]), Err(Pbf1Error::OutOfRange { index: 0, .. })));
    }

    #[test]
    fn beta_pbf1_order_independent_and_bounded() {
        let a = beta_pbf1(&[0.9, 0.5, 0.7]).unwrap();
        let b = beta_pbf1(&[0.5, 0.7, 0.9]).unwrap();
        assert_eq!(a, b);
        assert!(a <= 0.5);
    }

    #[test]
    fn input_similarity_buckets() {
        // Worked example: eight components, four division sources, R = 0.5.
        let g = input_similarity_grade(&InputProfile { m: 8, s: 4, diversity: Diversity::Zero });
        assert_eq!(g, Grade::APlus);

        // Single shared source.
        let g = input_similarity_grade(&InputProfile { m: 4, s: 1, diversity: Diversity::Zero });
        assert_eq!(g, Grade::A);

        // One source per component with complete diversity.
        let g = input_similarity_grade(&InputProfile { m: 4, s: 4, diversity: Diversity::Complete });
        assert_eq!(g, Grade::E);

        // 0.5 < R < 1 splits on diversity.
        let g = input_similarity_grade(&InputProfile { m: 4, s: 3, diversity: Diversity::Zero });
        assert_eq!(g, Grade::B);
        let g = input_similarity_grade(&InputProfile { m: 4, s: 3, diversity: Diversity::Partial });
        assert_eq!(g, Grade::C);

        // R >= 1 with zero or partial diversity.
        let g = input_similarity_grade(&InputProfile { m: 2, s: 5, diversity: Diversity::Partial });
        assert_eq!(g, Grade::D);
    }
}
