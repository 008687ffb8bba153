//! JSON file formats and the glue used by the `tmirror` binary.
//!
//! Every artifact is one JSON document. Writers are canonical: walls, table entries and
//! map keys come out in a fixed order, so the same input and seed give byte-identical
//! output.

pub mod bigint_serde;
mod files;
mod suite;

pub use files::{
    ComplexSpec, GeometrySpec, MonoidSpec, PhiSpec, ProblemSpec, TableFile, TableRecord, ThetaRecord,
    VertexFile, VertexRecord, WallSpec,
};
pub use suite::{run_checks, CheckReport, Suite, SuiteOutcome};

use serde::de::DeserializeOwned;
use serde::Serialize;
use thiserror::Error;

use crate::arith::{self, Rat};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum InterfaceError {
    /// Malformed input; the message starts with the offending field.
    #[error("{0}")]
    Input(String),
    /// Well-formed input on which a computation failed.
    #[error("{0}")]
    Compute(String),
}

impl InterfaceError {
    pub fn field(field: &str, reason: impl std::fmt::Display) -> Self {
        InterfaceError::Input(format!("{field}: {reason}"))
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            InterfaceError::Input(_) => 2,
            InterfaceError::Compute(_) => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, InterfaceError>;

/// Parses JSON, reporting the path of the first bad field.
pub fn from_json<T: DeserializeOwned>(text: &str) -> Result<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        if path == "." {
            InterfaceError::Input(inner.to_string())
        } else {
            InterfaceError::field(&path, inner)
        }
    })
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("artifacts serialize");
    s.push('\n');
    s
}

/// `"1,-2"` as an integer vector.
pub fn parse_ints(field: &str, s: &str) -> Result<Vec<i64>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<i64>()
                .map_err(|_| InterfaceError::field(field, format!("{:?} is not an integer", t.trim())))
        })
        .collect()
}

/// `"1/2,-3/7"` as a rational vector.
pub fn parse_rats(field: &str, s: &str) -> Result<Vec<Rat>> {
    s.split(',')
        .map(|t| arith::parse_rat(t).ok_or_else(|| InterfaceError::field(field, format!("{:?} is not a rational", t.trim()))))
        .collect()
}

/// `"1,0;0,1"` as a list of points.
pub fn parse_points(field: &str, s: &str) -> Result<Vec<Vec<i64>>> {
    s.split(';').map(|p| parse_ints(field, p)).collect()
}

/// Rationals as JSON integers when integral and `"p/q"` strings otherwise.
pub mod rat_serde {
    use serde::de::{self, Deserializer, Visitor};
    use serde::ser::{SerializeSeq, Serializer};
    use serde::Deserialize;
    use std::fmt;

    use crate::arith::{self, Rat};

    struct One(Rat);

    impl serde::Serialize for One {
        fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
            use num_traits::ToPrimitive;
            match self.0.is_integer().then(|| self.0.numer().to_i64()).flatten() {
                Some(x) => s.serialize_i64(x),
                None => s.serialize_str(&arith::fmt_rat(&self.0)),
            }
        }
    }

    struct RatVisitor;

    impl<'de> Visitor<'de> for RatVisitor {
        type Value = Rat;

        fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
            write!(f, "an integer or a string like \"-3/7\"")
        }

        fn visit_i64<E: de::Error>(self, v: i64) -> Result<Rat, E> {
            Ok(arith::rat(v))
        }

        fn visit_u64<E: de::Error>(self, v: u64) -> Result<Rat, E> {
            Ok(Rat::from_integer(v.into()))
        }

        fn visit_str<E: de::Error>(self, v: &str) -> Result<Rat, E> {
            arith::parse_rat(v).ok_or_else(|| E::custom(format!("bad rational {v:?}")))
        }
    }

    impl<'de> Deserialize<'de> for One {
        fn deserialize<D: Deserializer<'de>>(d: D) -> Result<One, D::Error> {
            d.deserialize_any(RatVisitor).map(One)
        }
    }

    pub fn serialize<S: Serializer>(v: &[Rat], s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(v.len()))?;
        for r in v {
            seq.serialize_element(&One(r.clone()))?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Rat>, D::Error> {
        Ok(Vec::<One>::deserialize(d)?.into_iter().map(|o| o.0).collect())
    }

    pub mod opt {
        use super::*;

        pub fn serialize<S: Serializer>(v: &Option<Vec<Rat>>, s: S) -> Result<S::Ok, S::Error> {
            match v {
                Some(v) => super::serialize(v, s),
                None => s.serialize_none(),
            }
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Vec<Rat>>, D::Error> {
            Ok(Option::<Vec<One>>::deserialize(d)?.map(|v| v.into_iter().map(|o| o.0).collect()))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::build_affine_structure_dim2;
    use crate::scattering::complete;
    use crate::theta::{theta_local, AlgebraOptions, MirrorAlgebra};
    use crate::vertex::DualComplex;

    const COMMUTATOR: &str = r#"{
        "geometry": { "rank": 2, "rays": [[1, 0], [0, 1], [-1, -1]], "affine": "toric" },
        "monoid": { "generators": ["t1", "t2"] },
        "order": 4,
        "walls": [
            { "direction": [1, 0], "normal": [0, 1],
              "function": [ { "m": [0, 0], "c": 1 }, { "q": [1, 0], "m": [1, 0], "c": 1 } ] },
            { "direction": [0, 1], "normal": [1, 0],
              "function": [ { "m": [0, 0], "c": 1 }, { "q": [0, 1], "m": [0, 1], "c": 1 } ] }
        ]
    }"#;

    #[test]
    fn diagram_file_round_trip() {
        let spec = ProblemSpec::parse(COMMUTATOR).unwrap();
        let done = complete(&spec.diagram().unwrap()).unwrap();
        let file = ProblemSpec::from_diagram(&done, &spec);
        let text = to_json(&file);
        let back = ProblemSpec::parse(&text).unwrap();
        assert_eq!(back, file);
        assert_eq!(back.diagram().unwrap(), done);
        assert_eq!(to_json(&back), text);
        assert_eq!(file.walls.iter().filter(|w| w.inserted).count(), 1);
    }

    #[test]
    fn geometry_round_trip() {
        for d in [vec![1, 1, 1], vec![0, 0, 0, 0], vec![-1, -1, -1, -1, -1], vec![-2, -2, -2]] {
            let am = build_affine_structure_dim2(&d).unwrap();
            let spec = GeometrySpec::from_manifold(&am);
            let back: GeometrySpec = from_json(&to_json(&spec)).unwrap();
            assert_eq!(back.build().unwrap(), am, "{d:?}");
        }
    }

    #[test]
    fn phi_by_kinks_matches_derivatives() {
        let text = r#"{ "geometry": { "rank": 2, "self_intersections": [1, 1, 1] },
            "monoid": { "generators": ["t"] }, "order": 2, "phi": { "kinks": [[1], [1], [1]] } }"#;
        let spec = ProblemSpec::parse(text).unwrap();
        let d = spec.diagram().unwrap();
        let file = ProblemSpec::from_diagram(&d, &spec);
        assert!(matches!(file.phi, Some(PhiSpec::Derivatives { .. })));
        assert_eq!(ProblemSpec::parse(&to_json(&file)).unwrap().diagram().unwrap(), d);
    }

    #[test]
    fn table_and_theta_round_trip() {
        let spec = ProblemSpec::parse(COMMUTATOR).unwrap();
        let d = spec.diagram().unwrap();
        let opts = AlgebraOptions { bound: 1, ..AlgebraOptions::default() };
        let table = MirrorAlgebra::new(d.clone(), opts).unwrap().table().unwrap();
        let file = TableFile::from(&table);
        let back: TableFile = from_json(&to_json(&file)).unwrap();
        assert_eq!(back.to_table().unwrap(), table);

        let x = parse_rats("x", "-7/3,2/5").unwrap();
        let t = theta_local(&d, &[1, 1], &x).unwrap();
        let rec = ThetaRecord::from(&t);
        let text = to_json(&rec);
        assert!(text.contains("\"-7/3\""));
        assert_eq!(from_json::<ThetaRecord>(&text).unwrap(), rec);
    }

    #[test]
    fn complex_round_trip() {
        let spec = ComplexSpec::parse(r#"{ "simplices": [[0, 1], [1, 2], [2, 0]], "cone": true }"#).unwrap();
        let k = spec.complex().unwrap();
        let back: DualComplex = from_json(&to_json(&k)).unwrap();
        assert_eq!(back, k);
        let cells = ComplexSpec {
            simplices: None,
            cells: Some(k.cells.clone()),
            orientations: k.orientations.clone(),
            cone: false,
            ..spec.clone()
        };
        assert_eq!(ComplexSpec::parse(&to_json(&cells)).unwrap().complex().unwrap(), k);
        let v = VertexFile::build(&spec).unwrap();
        assert!(v.passed());
        assert_eq!(from_json::<VertexFile>(&to_json(&v)).unwrap(), v);
    }

    #[test]
    fn errors_name_the_field() {
        let bad = COMMUTATOR.replace("\"c\": 1 }, { \"q\": [1, 0]", "\"c\": \"one\" }, { \"q\": [1, 0]");
        let e = ProblemSpec::parse(&bad).unwrap_err();
        assert!(e.to_string().starts_with("walls[0].function[0].c"), "{e}");
        assert_eq!(e.exit_code(), 2);
        let e = ProblemSpec::parse(&COMMUTATOR.replace("\"order\": 4", "\"order\": 0")).unwrap_err();
        assert!(e.to_string().starts_with("order"), "{e}");
        let e = ProblemSpec::parse(&COMMUTATOR.replace("\"normal\": [0, 1]", "\"normal\": [1, 1]"))
            .unwrap()
            .diagram()
            .unwrap_err();
        assert!(e.to_string().starts_with("walls[0]"), "{e}");
        let e = ProblemSpec::parse(&COMMUTATOR.replace("\"order\"", "\"ordre\"")).unwrap_err();
        assert!(e.to_string().contains("ordre"), "{e}");
    }

    #[test]
    fn cli_point_parsing() {
        assert_eq!(parse_points("inputs", "1,0; -1,2").unwrap(), vec![vec![1, 0], vec![-1, 2]]);
        assert!(parse_ints("direction", "1,x").unwrap_err().to_string().starts_with("direction"));
        assert_eq!(parse_rats("basepoint", "1/2, -3").unwrap()[1], arith::rat(-3));
    }

    #[test]
    fn checks_on_completed_commutator() {
        let spec = ProblemSpec::parse(COMMUTATOR).unwrap();
        let done = complete(&spec.diagram().unwrap()).unwrap();
        let mut file = ProblemSpec::from_diagram(&done, &spec);
        file.bound = 1;
        let report = run_checks(&file, Suite::All).unwrap();
        assert!(report.passed, "{report:?}");
        file.walls.retain(|w| !w.inserted);
        let report = run_checks(&file, Suite::Consistency).unwrap();
        assert!(!report.passed);
        assert!(report.outcomes[0].counterexample.as_deref().unwrap().starts_with("joint (0, 0)"));
    }
}
