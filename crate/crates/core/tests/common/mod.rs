#![allow(dead_code)]

use std::path::Path;
use std::process::{Command, Output};

pub fn qpp(args: &[&str]) -> Output {
    qpp_env(args, &[])
}

pub fn qpp_env(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_qpp"));
    cmd.args(args).env_remove("QPP_TOL");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("failed to spawn qpp")
}

pub fn code(out: &Output) -> i32 {
    out.status.code().expect("qpp terminated by signal")
}

pub fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("stdout is utf-8")
}

pub fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).expect("stderr is utf-8")
}

pub fn path_str(p: &Path) -> &str {
    p.to_str().expect("temp paths are utf-8")
}
