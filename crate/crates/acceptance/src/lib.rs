//! Holds the `acceptance` test target; run it with
//! `cargo test -p bilinear-rank-acceptance --test acceptance`.
