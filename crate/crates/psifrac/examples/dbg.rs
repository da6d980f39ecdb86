use psifrac::langevin::{residual, solve_picard, SolverConfig, Orders};
use psifrac::manufactured::Manufactured;
use psifrac::psi::{Domain, PsiFunction};
use psifrac::build_mesh;

fn main() {
    let dom = Domain::new(0.0, 0.25, 0.375, 0.5).unwrap();
    let m = Manufactured::new(PsiFunction::identity(), dom,
        Orders::new(1.5, 0.9, 0.3).unwrap(), 0.05, 0.1, 4.0, 0.05, 0.05).unwrap();
    for n in [128usize, 256, 512, 1024] {
        let cfg = SolverConfig { n, tol: 1e-10, max_iter: 200, omega: 1.0 };
        let b = solve_picard(&m.problem, &cfg).unwrap();
        let mesh = build_mesh(&m.problem.psi, &dom, n).unwrap();
        let exact = m.exact_grid(&mesh);
        let r_star = residual(&m.problem, &exact).unwrap();
        println!("N={n}: res(solver)={:.3e} res(exact)={:.3e} ratio={:.1} err_u={:.3e}",
            b.residual.interior_max, r_star.interior_max,
            b.residual.interior_max / r_star.interior_max,
            b.u.max_abs_diff(&exact));
    }
}
