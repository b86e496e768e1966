use qmckit::jackson::QParams;
use qmckit::qmc::MatrixTuple;
use qmckit::tuple_file::{format_tuple, read_tuple, TupleFile};

fn data_path() -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("data/degree2_tuple.txt")
}

fn expected() -> TupleFile {
    let p = QParams::real(0.5, 0.3, 0.7, 1.9, 2.3, 3.1).unwrap();
    TupleFile {
        q: p.q,
        lambda: p.lambda,
        tuple: MatrixTuple::degree2(&p),
    }
}

#[test]
fn bundled_tuple_is_the_degree2_tuple_at_default_parameters() {
    assert_eq!(read_tuple(&data_path()).unwrap(), expected());
    assert_eq!(std::fs::read_to_string(data_path()).unwrap(), format_tuple(&expected()));
}
