//! Compiles and runs a small C client against the generated header and the
//! static library.

use std::path::PathBuf;
use std::process::Command;

fn header_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("include")
}

/// `target/<profile>`, found from the test binary in `target/<profile>/deps`.
fn profile_dir() -> PathBuf {
    let exe = std::env::current_exe().unwrap();
    exe.parent().and_then(|deps| deps.parent()).unwrap().to_path_buf()
}

#[test]
fn header_compiles_as_c_and_cpp() {
    let header = header_dir().join("mdpvi.h");
    assert!(header.exists(), "build script did not write {}", header.display());
    for (compiler, lang) in [("cc", "c"), ("c++", "c++")] {
        let status = Command::new(compiler)
            .args(["-fsyntax-only", "-Wall", "-Werror", "-x", lang])
            .arg(&header)
            .status()
            .expect("C compiler available");
        assert!(status.success(), "{compiler} rejected the header");
    }
}

const CLIENT: &str = r#"
#include <stdio.h>
#include "mdpvi.h"

int main(void) {
    const char *json = "{\"num_states\":3,\"actions\":[[\"b\",\"c\"],[\"b\"],[\"b\"]],"
                       "\"rewards\":[[0,0],[1],[-1]],"
                       "\"transitions\":[[[0,0,1],[0,1,0]],[[0,1,0]],[[0,0,1]]]}";
    MdpviMdp *mdp = NULL;
    if (mdpvi_mdp_from_json(json, &mdp) != MDPVI_STATUS_OK) return 10;
    double v0[3] = {1.0, 2.0, -2.0};
    MdpviRun *run = NULL;
    if (mdpvi_value_iterate(mdp, 0.24, 0.02, v0, 3, &run) != MDPVI_STATUS_OK) return 11;
    size_t policy[3];
    if (mdpvi_run_policy(run, policy, 3) != MDPVI_STATUS_OK) return 12;
    printf("%llu %zu %zu %zu\n", (unsigned long long)mdpvi_run_iterations(run), policy[0], policy[1], policy[2]);
    if (mdpvi_mdp_from_json("{", &mdp) != MDPVI_STATUS_PARSE_ERROR) return 13;
    if (mdpvi_last_error_message() == NULL) return 14;
    mdpvi_run_free(run);
    mdpvi_mdp_free(mdp);
    return 0;
}
"#;

#[test]
fn c_client_links_and_runs() {
    let lib = profile_dir().join("libmdpvi_ffi.a");
    assert!(lib.exists(), "static library missing at {}", lib.display());
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("client.c");
    let exe = dir.path().join("client");
    std::fs::write(&src, CLIENT).unwrap();
    let status = Command::new("cc")
        .arg(&src)
        .arg("-I")
        .arg(header_dir())
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success(), "link failed");
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "client exited with {:?}", out.status);
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "3 1 0 0");
}
