//! Reporting helpers for the acceptance suite in `tests/acceptance.rs`.

/// Prints the one-line verdict for criterion `n` and returns `pass`.
pub fn verdict(n: u32, pass: bool, detail: &str) -> bool {
    println!("{} criterion {n}: {detail}", if pass { "PASS" } else { "FAIL" });
    pass
}
