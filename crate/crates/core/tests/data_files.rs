use scanboard::corpus::CharacterInventory;
use scanboard::error_model::io::ParamsFile;
use scanboard::layout::io::{read_spec_json, write_spec_json};
use scanboard::layout::KeyboardSpec;

fn data(name: &str) -> String {
    std::fs::read_to_string(format!("{}/../../data/{name}", env!("CARGO_MANIFEST_DIR"))).unwrap()
}

#[test]
fn shipped_spec_is_the_default() {
    let text = data("spec_8x8.json");
    assert_eq!(read_spec_json(&text).unwrap(), KeyboardSpec::default_8x8());
    assert_eq!(write_spec_json(&KeyboardSpec::default_8x8()), text);
}

#[test]
fn shipped_inventory_is_the_default() {
    let inv = CharacterInventory::from_lines(&data("inventory_64.txt")).unwrap();
    assert_eq!(inv, CharacterInventory::default_64());
}

#[test]
fn shipped_params_cover_every_stage() {
    for name in ["params.json", "generator_params.json"] {
        let params = ParamsFile::from_json(&data(name)).unwrap();
        for d in [0.25, 0.35, 0.5] {
            let rows = params.row_params_at(d).unwrap();
            assert_eq!(
                rows.keys().copied().collect::<Vec<_>>(),
                (1..=8).collect::<Vec<_>>(),
                "{name}"
            );
            assert!(params.substituted_durations(d).is_empty());
        }
    }
}
