declare_proc(env,1,"add",
             mk_proc(oly_e1,env,2));
