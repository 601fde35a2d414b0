//! Holds the `acceptance` integration test, which prints one PASS/FAIL line
//! per criterion. Run it with `cargo test -p disloc-validation --test acceptance`.
