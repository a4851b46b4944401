//! Prints the default configuration as TOML; every key is optional.

fn main() {
    print!("{}", toeplab::config::LabConfig::default().to_toml());
}
