Int oly_e1(Env env, Object self) {
  return(lookup_int(env,0,0) +
         lookup_int(env,0,1));
}
