//! The shipped JSON fixtures are byte-identical to the canonical
//! serialization of the in-code builders, and survive parse → write.
//! Run with `MECHKIT_BLESS=1` to rewrite them.

use std::path::PathBuf;

use mechkit::io::{self, ParseOptions};
use mechkit::{fixtures, TypeSpace};
use serde_json::json;

fn dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

fn expected() -> Vec<(&'static str, String)> {
    let mut out: Vec<(&'static str, String)> = vec![
        ("fx1.json", io::write_instance(&fixtures::fx1())),
        ("fx2.json", io::write_instance(&fixtures::fx2())),
        ("fx3.json", io::write_instance(&fixtures::fx3())),
        ("fx4.json", io::write_allocation(&fixtures::fx4())),
        ("fx5.json", io::write_instance(&fixtures::fx5())),
        ("fx1-independent.json", io::write_instance(&fixtures::fx1_independent())),
    ];
    let sp: TypeSpace = fixtures::pm1_space();
    let x = json!({"name": "xstar", "x": io::mechanism_to_value(&fixtures::xstar(), &sp)});
    out.push(("xstar.json", io::to_canonical_string(&x)));
    out
}

#[test]
fn fixture_files_are_canonical() {
    let bless = std::env::var_os("MECHKIT_BLESS").is_some();
    for (name, text) in expected() {
        let path = dir().join(name);
        if bless {
            std::fs::write(&path, &text).unwrap();
        }
        let on_disk = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert_eq!(on_disk, text, "{name} differs from its builder");
    }
}

#[test]
fn fixture_files_round_trip() {
    for (name, text) in expected() {
        if name == "xstar.json" {
            let x = io::parse_mechanism(&text, &fixtures::pm1_space()).unwrap();
            assert_eq!(x, fixtures::xstar());
            continue;
        }
        let doc = io::parse_document(&text, ParseOptions::default()).unwrap();
        let again = match &doc {
            io::Document::TwoOption(i) => io::write_instance(i),
            io::Document::Allocation(a) => io::write_allocation(a),
        };
        assert_eq!(again, text, "{name} does not round-trip");
    }
}

#[test]
fn parsed_fixtures_equal_builders() {
    let text = std::fs::read_to_string(dir().join("fx2.json")).unwrap();
    assert_eq!(io::parse_instance(&text, ParseOptions::default()).unwrap(), fixtures::fx2());
    let text = std::fs::read_to_string(dir().join("fx4.json")).unwrap();
    assert_eq!(io::parse_allocation(&text, ParseOptions::default()).unwrap(), fixtures::fx4());
}
