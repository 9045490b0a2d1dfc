//! CSV headers, one per scenario kind. Changing any of these is a schema
//! change and should bump [`VERSION`].

pub const VERSION: u32 = 1;

pub const THRESHOLD: &str = "scenario,family,n,m,alpha,p_hat,ci_lo,ci_hi,samples,seed";
pub const THETA: &str = "scenario,family,n,m,p,theta_hat,stderr,samples,seed";
pub const UNIQUENESS: &str = "scenario,family,n,m,p,c,unique_hat,ci_lo,ci_hi,samples,seed";
pub const GAP: &str =
    "scenario,family,n,m,alpha1,alpha2,p_hat1,p_hat2,gap,ci_lo,ci_hi,samples,seed";
pub const WINDOW: &str = "scenario,family,p,sizes,slope,stderr,r2,samples,seed";
pub const EIT: &str =
    "scenario,family,n,u,v,path_length,pairs,c_hat,c_hat_stderr,fit_lo,fit_hi,degenerate,reason,seed";
pub const RESISTANCE: &str = "scenario,family,n,m,u,v,r_eff,iterations,residual_norm,seed";
pub const BOUNDS: &str =
    "scenario,a_size,l,k,eps,n_paths_lb,n_paths_lb_f64,failure_ub_ln,failure_ub_log10";
pub const GEOMETRY: &str = "scenario,family,n,m,min_degree,max_degree,diameter,diameter_exact,diam_over_log_n,\
below_cube_root,below_n_over_log_n,transitive,fraction,set_distance,ratio,h_exact,h_spectral_lb,lambda2,delta_exact";
pub const PROP1: &str =
    "scenario,family,n,p,c,samples,q_hat,q_lo,s_size,s_symmetric,s_generating,diam_s,\
word_bound_slack,rhs,rhs_lo,min_pair_conn_hat,min_pair_stderr,pass,seed";
